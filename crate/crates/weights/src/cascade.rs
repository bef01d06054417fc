use dyadic_core::{Cube, RootBox};

use crate::step_weight::{pairwise_sum, StepWeight};
use crate::WeightError;

/// Parameters of the multiplicative cascade `W_depth(a, interval, epsilon)`.
#[derive(Debug, Clone)]
pub struct CascadeParams {
    /// Root average, in (0, 1].
    pub a: f64,
    /// Per-split tilt, |epsilon| < 1; the left child is scaled by 1 − ε and
    /// the right child by 1 + ε.
    pub epsilon: f64,
    /// Number of splitting generations.
    pub depth: u32,
    /// The 1D base interval.
    pub interval: Cube,
}

/// Build the cascade by repeated doubling.  The leaf with sign history
/// (s_1, …, s_N) carries the value a·Π(1 + s_k ε), multiplied in path order,
/// and every dyadic average above the leaves equals a·Π over the prefix.
pub fn cascade(p: &CascadeParams) -> Result<StepWeight, WeightError> {
    if p.interval.dim() != 1 {
        return Err(WeightError::BadParameter("cascade interval must be 1D".into()));
    }
    if !(p.a > 0.0 && p.a <= 1.0) {
        return Err(WeightError::BadParameter(format!("cascade a={} outside (0,1]", p.a)));
    }
    if !(p.epsilon.abs() < 1.0) {
        return Err(WeightError::BadParameter(format!(
            "cascade epsilon={} outside (-1,1)",
            p.epsilon
        )));
    }
    let mut vals = vec![p.a];
    for _ in 0..p.depth {
        let mut next = Vec::with_capacity(vals.len() * 2);
        for &v in &vals {
            next.push(v * (1.0 - p.epsilon));
            next.push(v * (1.0 + p.epsilon));
        }
        vals = next;
    }
    StepWeight::new(p.interval.clone(), p.depth, vals)
}

/// The closed form a²(1 − (1 − ε²)^N) for the horizontal testing value of the
/// depth-N pair (W_N(a, J, ε), W_N(1, J, −ε)).
pub fn exact_testing_value(a: f64, epsilon: f64, depth: u32) -> f64 {
    a * a * (1.0 - (1.0 - epsilon * epsilon).powi(depth as i32))
}

/// Glue a 1D pair with large constants on a sibling interval: the result
/// lives on the doubled interval, keeps (v, u) on the left half, and is
/// constant M·mean on the right half.  The top-level sibling average ratio is
/// then exactly M, so the dyadic doubling constant can be made arbitrarily
/// large without touching the testing behavior of the left half.
pub fn large_doubling_variant(
    v: &StepWeight,
    u: &StepWeight,
    m_factor: f64,
) -> Result<(StepWeight, StepWeight), WeightError> {
    if v.dim() != 1 || u.dim() != 1 {
        return Err(WeightError::BadParameter("doubling variant needs 1D weights".into()));
    }
    if !v.root().same_geometry(u.root()) {
        return Err(WeightError::BadParameter(
            "doubling variant needs a pair on a common interval".into(),
        ));
    }
    if !(m_factor >= 1.0) {
        return Err(WeightError::BadParameter(format!(
            "doubling factor {m_factor} must be >= 1"
        )));
    }
    let glue = |w: &StepWeight| -> Result<StepWeight, WeightError> {
        let corner = w.root().lower(0);
        let side = w.root().side().scale_pow2(1);
        let root = Cube::root_cube(RootBox::new(vec![corner], side)?);
        let mean = pairwise_sum(w.values()) / w.cells() as f64;
        let mut vals = Vec::with_capacity(w.cells() * 2);
        vals.extend_from_slice(w.values());
        vals.extend(std::iter::repeat(m_factor * mean).take(w.cells()));
        StepWeight::new(root, w.depth() + 1, vals)
    };
    Ok((glue(v)?, glue(u)?))
}
