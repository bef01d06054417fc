use gauss_quad::GaussLegendre;
use std::num::NonZeroUsize;
use weights::StepWeight;

use crate::consts::constants;
use crate::SingularOpsError;

/// Which singular kernel to evaluate, plus the principal-value truncations.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelKind {
    Hilbert,
    Riesz { axis: usize, dim: usize },
    IteratedRiesz { beta: Vec<u32>, dim: usize },
}

#[derive(Debug, Clone)]
pub struct KernelSpec {
    pub kind: KernelKind,
    /// Inner cutoff δ ≥ 0; 0 means the full principal value.
    pub inner_cutoff: f64,
    /// Outer cutoff; `None` is ∞.
    pub outer_cutoff: Option<f64>,
}

impl KernelSpec {
    pub fn new(kind: KernelKind) -> Result<Self, SingularOpsError> {
        match &kind {
            KernelKind::Hilbert => {}
            KernelKind::Riesz { axis, dim } => {
                if *axis < 1 || *axis > *dim {
                    return Err(SingularOpsError::BadParameter(format!(
                        "Riesz axis {axis} outside 1..={dim}"
                    )));
                }
            }
            KernelKind::IteratedRiesz { beta, dim } => {
                if beta.len() != *dim {
                    return Err(SingularOpsError::BadParameter(format!(
                        "multiindex length {} does not match dimension {dim}",
                        beta.len()
                    )));
                }
                if beta.iter().sum::<u32>() == 0 {
                    return Err(SingularOpsError::BadParameter(
                        "multiindex must have positive total order".into(),
                    ));
                }
            }
        }
        Ok(KernelSpec { kind, inner_cutoff: 0.0, outer_cutoff: None })
    }

    pub fn hilbert() -> Self {
        KernelSpec { kind: KernelKind::Hilbert, inner_cutoff: 0.0, outer_cutoff: None }
    }

    pub fn riesz(axis: usize, dim: usize) -> Result<Self, SingularOpsError> {
        KernelSpec::new(KernelKind::Riesz { axis, dim })
    }

    pub fn iterated(beta: Vec<u32>, dim: usize) -> Result<Self, SingularOpsError> {
        KernelSpec::new(KernelKind::IteratedRiesz { beta, dim })
    }

    pub fn with_truncation(
        mut self,
        inner: f64,
        outer: Option<f64>,
    ) -> Result<Self, SingularOpsError> {
        if !(inner >= 0.0) {
            return Err(SingularOpsError::BadParameter(format!("inner cutoff {inner} < 0")));
        }
        if let Some(r) = outer {
            if r <= inner {
                return Err(SingularOpsError::BadParameter(format!(
                    "outer cutoff {r} not beyond inner cutoff {inner}"
                )));
            }
        }
        self.inner_cutoff = inner;
        self.outer_cutoff = outer;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            KernelKind::Hilbert => 1,
            KernelKind::Riesz { dim, .. } | KernelKind::IteratedRiesz { dim, .. } => *dim,
        }
    }

    /// Total order N of the symbol.
    pub fn order(&self) -> u32 {
        match &self.kind {
            KernelKind::Hilbert | KernelKind::Riesz { .. } => 1,
            KernelKind::IteratedRiesz { beta, .. } => beta.iter().sum(),
        }
    }
}

const MAX_SUBDIVISION: u32 = 12;

/// Principal-value quadrature of the truncated kernel against a step
/// weight.  Regular cells get adaptive tensor Gauss–Legendre; the cell
/// containing x is handled by exact odd-symmetry cancellation over the
/// largest centered cube plus quadrature of the 2n remaining slabs, which
/// also makes the value independent of the inner cutoff once it is below
/// the distance from x to the cell faces.
pub fn riesz_quad(
    spec: &KernelSpec,
    w: &StepWeight,
    x: &[f64],
    tol: f64,
) -> Result<f64, SingularOpsError> {
    let n = w.dim();
    if spec.dim() != n || x.len() != n {
        return Err(SingularOpsError::BadParameter(format!(
            "kernel dimension {}, weight dimension {n}, point dimension {}",
            spec.dim(),
            x.len()
        )));
    }
    if !(tol > 0.0) {
        return Err(SingularOpsError::BadParameter(format!("tolerance {tol} must be positive")));
    }
    let kernel = scalar_kernel(spec)?;
    let delta = spec.inner_cutoff;
    let outer = spec.outer_cutoff.unwrap_or(f64::INFINITY);
    let f = move |y: &[f64]| {
        let z: Vec<f64> = (0..y.len()).map(|j| x[j] - y[j]).collect();
        let r = z.iter().map(|t| t * t).sum::<f64>().sqrt();
        if r <= delta || r >= outer {
            0.0
        } else {
            kernel(&z)
        }
    };

    // one integration job per regular cell / remainder slab
    let mut jobs: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    let leaves = w.root().grandchildren(w.depth())?;
    for (q, &value) in leaves.iter().zip(w.values()) {
        if value == 0.0 {
            continue;
        }
        let lo: Vec<f64> = (0..n).map(|j| q.lower(j).to_f64()).collect();
        let hi: Vec<f64> = (0..n).map(|j| q.upper(j).to_f64()).collect();
        let inside_closed = (0..n).all(|j| lo[j] <= x[j] && x[j] <= hi[j]);
        if !inside_closed {
            jobs.push((lo, hi, value));
            continue;
        }
        let r = (0..n).map(|j| (x[j] - lo[j]).min(hi[j] - x[j])).fold(f64::INFINITY, f64::min);
        if r == 0.0 {
            return Err(SingularOpsError::BoundaryPoint(format!(
                "evaluation point {x:?} lies on the cell lattice"
            )));
        }
        // centered cube [x−r, x+r]^n contributes exactly zero (odd kernel,
        // symmetric truncations); peel the remainder into 2n slabs
        for j in 0..n {
            for upper in [false, true] {
                let mut slo = vec![0.0; n];
                let mut shi = vec![0.0; n];
                for i in 0..n {
                    if i < j {
                        slo[i] = lo[i];
                        shi[i] = hi[i];
                    } else if i > j {
                        slo[i] = x[i] - r;
                        shi[i] = x[i] + r;
                    } else if upper {
                        slo[i] = x[i] + r;
                        shi[i] = hi[i];
                    } else {
                        slo[i] = lo[i];
                        shi[i] = x[i] - r;
                    }
                }
                if shi[j] > slo[j] {
                    jobs.push((slo, shi, value));
                }
            }
        }
    }

    if jobs.is_empty() {
        return Ok(0.0);
    }
    let coarse = GaussLegendre::new(NonZeroUsize::new(8).unwrap());
    let fine = GaussLegendre::new(NonZeroUsize::new(16).unwrap());
    let job_tol = tol / jobs.len() as f64;
    let mut total = 0.0;
    let mut achieved = 0.0;
    for (lo, hi, value) in &jobs {
        let (v, e) = adaptive_box(&f, lo, hi, &coarse, &fine, job_tol / value.abs().max(1.0), 0);
        total += value * v;
        achieved += value.abs() * e;
    }
    if achieved > tol {
        return Err(SingularOpsError::QuadratureBudget { requested: tol, achieved });
    }
    Ok(total)
}

fn scalar_kernel(
    spec: &KernelSpec,
) -> Result<Box<dyn Fn(&[f64]) -> f64 + Send + Sync>, SingularOpsError> {
    match &spec.kind {
        KernelKind::Hilbert => Ok(Box::new(|z: &[f64]| 1.0 / (std::f64::consts::PI * z[0]))),
        KernelKind::Riesz { axis, dim } => {
            let c = constants(*dim)?.c_n;
            let j = axis - 1;
            let n = *dim;
            Ok(Box::new(move |z: &[f64]| {
                let r2 = z.iter().map(|t| t * t).sum::<f64>();
                c * z[j] / r2.powf((n + 1) as f64 / 2.0)
            }))
        }
        KernelKind::IteratedRiesz { beta, dim } => {
            if beta.iter().sum::<u32>() == 1 {
                let axis = beta.iter().position(|&b| b == 1).unwrap() + 1;
                scalar_kernel(&KernelSpec::riesz(axis, *dim)?)
            } else {
                Err(SingularOpsError::Unsupported(
                    "iterated kernels beyond first order use the Fourier backend".into(),
                ))
            }
        }
    }
}

fn tensor_gl(f: &dyn Fn(&[f64]) -> f64, lo: &[f64], hi: &[f64], rule: &GaussLegendre) -> f64 {
    let dim = lo.len();
    let pairs = rule.as_node_weight_pairs();
    let n = pairs.len();
    let mid: Vec<f64> = (0..dim).map(|j| 0.5 * (lo[j] + hi[j])).collect();
    let rad: Vec<f64> = (0..dim).map(|j| 0.5 * (hi[j] - lo[j])).collect();
    let jac: f64 = rad.iter().product();
    let mut sum = 0.0;
    let mut odo = vec![0usize; dim];
    let mut y = vec![0.0; dim];
    for _ in 0..n.pow(dim as u32) {
        let mut wprod = 1.0;
        for j in 0..dim {
            let (node, weight) = pairs[odo[j]];
            y[j] = mid[j] + rad[j] * node;
            wprod *= weight;
        }
        sum += wprod * f(&y);
        for j in (0..dim).rev() {
            odo[j] += 1;
            if odo[j] < n {
                break;
            }
            odo[j] = 0;
        }
    }
    jac * sum
}

// returns (value, error estimate); the estimate is the sum of accepted
// coarse/fine discrepancies, so the caller can report a missed budget
fn adaptive_box(
    f: &dyn Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    coarse: &GaussLegendre,
    fine: &GaussLegendre,
    tol: f64,
    depth: u32,
) -> (f64, f64) {
    let a = tensor_gl(f, lo, hi, coarse);
    let b = tensor_gl(f, lo, hi, fine);
    let disc = (a - b).abs();
    if disc <= tol || depth >= MAX_SUBDIVISION {
        return (b, disc);
    }
    let dim = lo.len();
    let child_tol = tol / (1 << dim) as f64;
    let mut value = 0.0;
    let mut err = 0.0;
    for part in 0..(1usize << dim) {
        let mut clo = lo.to_vec();
        let mut chi = hi.to_vec();
        for j in 0..dim {
            let mid = 0.5 * (lo[j] + hi[j]);
            if part >> j & 1 == 0 {
                chi[j] = mid;
            } else {
                clo[j] = mid;
            }
        }
        let (v, e) = adaptive_box(f, &clo, &chi, coarse, fine, child_tol, depth + 1);
        value += v;
        err += e;
    }
    (value, err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::hilbert_step;
    use dyadic_core::Cube;

    #[test]
    fn spec_validation_catches_bad_inputs() {
        assert!(KernelSpec::riesz(0, 2).is_err());
        assert!(KernelSpec::riesz(3, 2).is_err());
        assert!(KernelSpec::riesz(2, 2).is_ok());
        assert!(KernelSpec::iterated(vec![0, 0], 2).is_err());
        assert!(KernelSpec::iterated(vec![1], 2).is_err());
        assert!(KernelSpec::hilbert().with_truncation(-1.0, None).is_err());
        assert!(KernelSpec::hilbert().with_truncation(0.1, Some(0.05)).is_err());
    }

    #[test]
    fn centered_constant_cancels_exactly() {
        let w = StepWeight::constant(Cube::unit(2), 0, 3.0).unwrap();
        let spec = KernelSpec::riesz(1, 2).unwrap();
        let v = riesz_quad(&spec, &w, &[0.5, 0.5], 1e-9).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn matches_the_interval_closed_form() {
        let w = StepWeight::new(Cube::unit(1), 2, vec![0.3, 1.7, 0.9, 1.1]).unwrap();
        let spec = KernelSpec::hilbert();
        for &x in &[-0.4, 0.131, 0.6885, 2.75] {
            let got = riesz_quad(&spec, &w, &[x], 1e-10).unwrap();
            let want = hilbert_step(&w, x).unwrap();
            assert!((got - want).abs() < 1e-9, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn lattice_points_are_rejected() {
        let w = StepWeight::constant(Cube::unit(1), 2, 1.0).unwrap();
        let spec = KernelSpec::hilbert();
        assert!(matches!(
            riesz_quad(&spec, &w, &[0.25], 1e-8),
            Err(SingularOpsError::BoundaryPoint(_))
        ));
    }

    #[test]
    fn higher_order_kernels_are_deferred_to_the_fourier_backend() {
        let w = StepWeight::constant(Cube::unit(2), 1, 1.0).unwrap();
        let spec = KernelSpec::iterated(vec![2, 1], 2).unwrap();
        assert!(matches!(
            riesz_quad(&spec, &w, &[0.3, 0.3], 1e-8),
            Err(SingularOpsError::Unsupported(_))
        ));
        // order-one multiindices reduce to the plain kernel
        let one = KernelSpec::iterated(vec![0, 1], 2).unwrap();
        let plain = KernelSpec::riesz(2, 2).unwrap();
        let a = riesz_quad(&one, &w, &[0.3, 0.4], 1e-9).unwrap();
        let b = riesz_quad(&plain, &w, &[0.3, 0.4], 1e-9).unwrap();
        assert_eq!(a, b);
    }
}
