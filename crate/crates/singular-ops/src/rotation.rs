use crate::SingularOpsError;

/// A rotation chosen so that the first row of the rotated frame carries a
/// nonzero share of every factor of a mixed kernel power: composing the
/// axis kernels in the rotated coordinates reproduces `coefficient` times
/// the pure first-axis power plus cross terms.
#[derive(Debug, Clone)]
pub struct ExposingRotation {
    pub dim: usize,
    /// Row-major n×n orthogonal matrix with determinant +1.
    pub matrix: Vec<f64>,
    /// Planar angle when `dim == 2`.
    pub angle: Option<f64>,
    /// cos^{β₁}θ sin^{β₂}θ in the plane, Π u_j^{β_j} in general.
    pub coefficient: f64,
}

/// The weight the multi-power β picks up from a planar rotation by θ.
pub fn exposed_coefficient(beta: &[u32], theta: f64) -> f64 {
    assert_eq!(beta.len(), 2, "planar coefficient needs a planar power");
    theta.cos().powi(beta[0] as i32) * theta.sin().powi(beta[1] as i32)
}

/// Finds a rotation exposing the mixed power β on the first axis.  Pure
/// first-axis powers need no rotation; in the plane the best angle is
/// located by sampling plus golden-section refinement, and in higher
/// dimensions a Householder frame pointing e₁ at the diagonal gives the
/// uniform coefficient n^{−N/2}.
pub fn rotation_exposing(beta: &[u32], dim: usize) -> Result<ExposingRotation, SingularOpsError> {
    if beta.len() != dim || dim == 0 {
        return Err(SingularOpsError::BadParameter(format!(
            "power {beta:?} does not live in dimension {dim}"
        )));
    }
    let order: u32 = beta.iter().sum();
    if order == 0 {
        return Err(SingularOpsError::BadParameter("zero kernel power".into()));
    }
    if beta[1..].iter().all(|&b| b == 0) {
        let mut matrix = vec![0.0; dim * dim];
        for j in 0..dim {
            matrix[j * dim + j] = 1.0;
        }
        return Ok(ExposingRotation {
            dim,
            matrix,
            angle: (dim == 2).then_some(0.0),
            coefficient: 1.0,
        });
    }
    if dim == 2 {
        let theta = best_planar_angle(beta);
        let (s, c) = theta.sin_cos();
        return Ok(ExposingRotation {
            dim,
            matrix: vec![c, -s, s, c],
            angle: Some(theta),
            coefficient: exposed_coefficient(beta, theta),
        });
    }
    // Householder reflection sending e₁ to the unit diagonal u, with one
    // column flipped to restore determinant +1.
    let u = (dim as f64).sqrt().recip();
    let mut v = vec![-u; dim];
    v[0] = 1.0 - u;
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let mut matrix = vec![0.0; dim * dim];
    for r in 0..dim {
        for cidx in 0..dim {
            let id = if r == cidx { 1.0 } else { 0.0 };
            matrix[r * dim + cidx] = id - 2.0 * v[r] * v[cidx] / vv;
        }
    }
    // a reflection has determinant −1; negating the last column (which is
    // never the exposed first column) makes it a rotation
    for r in 0..dim {
        matrix[r * dim + dim - 1] = -matrix[r * dim + dim - 1];
    }
    let coefficient = u.powi(order as i32);
    Ok(ExposingRotation { dim, matrix, angle: None, coefficient })
}

fn best_planar_angle(beta: &[u32]) -> f64 {
    let n = 2048;
    let mut best = (0.0f64, 0.0f64);
    for i in 0..=n {
        let theta = std::f64::consts::FRAC_PI_2 * i as f64 / n as f64;
        let c = exposed_coefficient(beta, theta).abs();
        if c > best.1 {
            best = (theta, c);
        }
    }
    // golden-section refinement of |coefficient| around the best sample
    let span = std::f64::consts::FRAC_PI_2 / n as f64;
    let (mut lo, mut hi) = (best.0 - span, best.0 + span);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    while hi - lo > 1e-13 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if exposed_coefficient(beta, a).abs() < exposed_coefficient(beta, b).abs() {
            lo = a;
        } else {
            hi = b;
        }
    }
    0.5 * (lo + hi)
}
