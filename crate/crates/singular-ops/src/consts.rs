use std::f64::consts::PI;

use crate::SingularOpsError;

/// Normalization constants of the Riesz kernel in dimension n.
///
/// c_n is the kernel constant, A_k = ∫(1+z²)^{−(k+1)/2} dz, and
/// B_n = c_n·A_n⋯A_1 is the constant relating R₁ acting on horizontal
/// patterns to the Hilbert transform of their 1D profile.  The product
/// telescopes to 1 in every dimension, which the tests pin down.
#[derive(Debug, Clone)]
pub struct RieszConstants {
    pub n: usize,
    pub c_n: f64,
    /// A_1..=A_n.
    pub a: Vec<f64>,
    pub b_n: f64,
}

/// Γ(numerator/2) in closed form: factorials for integer arguments,
/// double factorials times √π for half-integer ones.
pub fn gamma_half_integer(numerator: u32) -> f64 {
    assert!(numerator >= 1, "gamma argument must be positive");
    if numerator % 2 == 0 {
        let m = numerator / 2;
        (1..m).map(|i| i as f64).product()
    } else {
        let m = numerator / 2; // Γ(m + 1/2) = (2m−1)!!·√π/2^m
        let double_fact: f64 = (0..m).map(|i| (2 * i + 1) as f64).product();
        double_fact * PI.sqrt() / 2f64.powi(m as i32)
    }
}

pub fn constants(n: usize) -> Result<RieszConstants, SingularOpsError> {
    if n == 0 {
        return Err(SingularOpsError::BadParameter("dimension must be at least 1".into()));
    }
    let mut a = Vec::with_capacity(n);
    for k in 1..=n {
        let value = match k {
            1 => PI,
            2 => 2.0,
            _ => a[k - 3] * (k - 2) as f64 / (k - 1) as f64,
        };
        a.push(value);
    }
    let half_powers = (n + 1) / 2;
    let mut pi_pow = PI.powi(half_powers as i32);
    if (n + 1) % 2 == 1 {
        pi_pow *= PI.sqrt();
    }
    let c_n = gamma_half_integer(n as u32 + 1) / pi_pow;
    let b_n = a.iter().product::<f64>() * c_n;
    Ok(RieszConstants { n, c_n, a, b_n })
}
