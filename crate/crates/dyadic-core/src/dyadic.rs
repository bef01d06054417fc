use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

/// Exact dyadic rational `num / 2^log_den`, kept in lowest terms
/// (`num` odd or zero; zero is stored as `0 / 2^0`).
///
/// All cube coordinates in this crate are dyadic rationals so that grid
/// geometry (containment, adjacency, boundary contact) is decided exactly,
/// with no floating-point comparisons.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: i128,
    log_den: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, log_den: 0 };
    pub const ONE: Dyadic = Dyadic { num: 1, log_den: 0 };

    pub fn new(mut num: i128, mut log_den: u32) -> Self {
        while num != 0 && num % 2 == 0 && log_den > 0 {
            num /= 2;
            log_den -= 1;
        }
        if num == 0 {
            log_den = 0;
        }
        Dyadic { num, log_den }
    }

    pub fn from_int(n: i64) -> Self {
        Dyadic { num: n as i128, log_den: 0 }
    }

    pub fn num(&self) -> i128 {
        self.num
    }

    pub fn log_den(&self) -> u32 {
        self.log_den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_positive(&self) -> bool {
        self.num > 0
    }

    /// Multiply by 2^k (k may be negative).
    pub fn scale_pow2(&self, k: i32) -> Self {
        if k >= 0 {
            Dyadic::new(self.num << k as u32, self.log_den)
        } else {
            Dyadic::new(self.num, self.log_den + (-k) as u32)
        }
    }

    pub fn half(&self) -> Self {
        self.scale_pow2(-1)
    }

    /// Exact conversion: numerators stay well below 2^53 for all grids
    /// this crate produces.
    pub fn to_f64(&self) -> f64 {
        self.num as f64 / (self.log_den as f64).exp2()
    }

    fn aligned(&self, other: &Dyadic) -> (i128, i128) {
        let d = self.log_den.max(other.log_den);
        (self.num << (d - self.log_den), other.num << (d - other.log_den))
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        let d = self.log_den.max(rhs.log_den);
        let (a, b) = self.aligned(&rhs);
        Dyadic::new(a + b, d)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        self + (-rhs)
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: Dyadic) -> Dyadic {
        Dyadic::new(self.num * rhs.num, self.log_den + rhs.log_den)
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { num: -self.num, log_den: self.log_den }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = self.aligned(other);
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.log_den == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, 1u128 << self.log_den)
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Dyadic {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('/') {
            None => {
                let n: i128 = s.trim().parse().map_err(|e| format!("bad numerator {s:?}: {e}"))?;
                Ok(Dyadic::new(n, 0))
            }
            Some((num, den)) => {
                let n: i128 = num.trim().parse().map_err(|e| format!("bad numerator {num:?}: {e}"))?;
                let d: u128 = den.trim().parse().map_err(|e| format!("bad denominator {den:?}: {e}"))?;
                if !d.is_power_of_two() {
                    return Err(format!("denominator {d} is not a power of two"));
                }
                Ok(Dyadic::new(n, d.trailing_zeros()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_and_equality() {
        assert_eq!(Dyadic::new(4, 3), Dyadic::new(1, 1));
        assert_eq!(Dyadic::new(0, 7), Dyadic::ZERO);
        assert_eq!(Dyadic::new(6, 1), Dyadic::from_int(3));
    }

    #[test]
    fn arithmetic() {
        let a = Dyadic::new(3, 2); // 3/4
        let b = Dyadic::new(1, 1); // 1/2
        assert_eq!(a + b, Dyadic::new(5, 2));
        assert_eq!(a - b, Dyadic::new(1, 2));
        assert_eq!(a * b, Dyadic::new(3, 3));
        assert_eq!((a - a), Dyadic::ZERO);
        assert!(b < a);
        assert_eq!(a.to_f64(), 0.75);
    }

    #[test]
    fn display_roundtrip() {
        for d in [Dyadic::new(-5, 4), Dyadic::from_int(17), Dyadic::new(1, 30)] {
            let s = d.to_string();
            assert_eq!(s.parse::<Dyadic>().unwrap(), d);
        }
    }
}
