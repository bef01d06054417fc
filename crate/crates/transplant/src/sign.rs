use dyadic_core::Cube;
use weights::{direction_count, direction_sign, StepWeight};

use crate::TransplantError;

/// A ±1 step function on a cube at relative depth k whose sign on each cell
/// depends only on the parity of the cell's per-axis indices.  Direction
/// masks are shared with the Haar module: bit j set = sign change along axis
/// j, and the 2D mask-3 pattern is the checkerboard with + on the NW/SE
/// diagonal.
#[derive(Debug, Clone)]
pub struct SignPattern {
    pattern: StepWeight,
    direction: u32,
}

impl SignPattern {
    pub fn pattern(&self) -> &StepWeight {
        &self.pattern
    }

    pub fn direction(&self) -> u32 {
        self.direction
    }

    pub fn into_weight(self) -> StepWeight {
        self.pattern
    }
}

/// The alternating pattern on `q` whose restriction to any dyadic child
/// block is the 2×…×2 sign matrix of the given Haar direction; equivalently
/// the sum over depth-(k−1) descendants Q' of √|Q'|·h_{Q'}^{direction}.
pub fn sign_pattern(q: &Cube, k: u32, direction: u32) -> Result<SignPattern, TransplantError> {
    let dim = q.dim();
    let max = direction_count(dim);
    if direction == 0 || direction > max {
        return Err(TransplantError::BadParameter(format!(
            "direction {direction} unsupported in dimension {dim} (valid: 1..={max})"
        )));
    }
    if k == 0 {
        return Err(TransplantError::BadParameter("sign pattern depth k must be >= 1".into()));
    }
    let side = 1usize << k;
    let n = side.pow(dim as u32);
    let mut values = vec![0.0; n];
    let mut idx = vec![0usize; dim];
    for v in values.iter_mut() {
        let mut theta = 0u32;
        for (j, &ij) in idx.iter().enumerate() {
            theta |= ((ij & 1) as u32) << j;
        }
        *v = direction_sign(dim, direction, theta);
        for j in (0..dim).rev() {
            idx[j] += 1;
            if idx[j] < side {
                break;
            }
            idx[j] = 0;
        }
    }
    let pattern = StepWeight::new(q.clone(), k, values)?;
    Ok(SignPattern { pattern, direction })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_pattern_alternates_on_quarters() {
        let s = sign_pattern(&Cube::unit(1), 2, 1).unwrap();
        assert_eq!(s.pattern().values(), &[1.0, -1.0, 1.0, -1.0]);
    }

    #[test]
    fn checkerboard_matrix_has_plus_on_the_main_diagonal() {
        // flat order (SW, NW, SE, NE); checkerboard is + at NW and SE
        let s = sign_pattern(&Cube::unit(2), 1, 3).unwrap();
        assert_eq!(s.pattern().values(), &[-1.0, 1.0, 1.0, -1.0]);
    }

    #[test]
    fn horizontal_and_vertical_blocks_tile() {
        // horizontal flips along axis 0 only, vertical along axis 1 only
        let h = sign_pattern(&Cube::unit(2), 2, 1).unwrap();
        let v = sign_pattern(&Cube::unit(2), 2, 2).unwrap();
        for p0 in 0..4usize {
            for p1 in 0..4usize {
                let flat = p0 * 4 + p1;
                assert_eq!(h.pattern().values()[flat], if p0 % 2 == 0 { 1.0 } else { -1.0 });
                assert_eq!(v.pattern().values()[flat], if p1 % 2 == 0 { 1.0 } else { -1.0 });
            }
        }
    }

    #[test]
    fn bad_directions_are_rejected() {
        assert!(sign_pattern(&Cube::unit(1), 2, 2).is_err());
        assert!(sign_pattern(&Cube::unit(2), 2, 4).is_err());
        assert!(sign_pattern(&Cube::unit(2), 0, 1).is_err());
    }
}
