use dyadic_core::{Cube, Dyadic, RootBox};
use gauss_quad::GaussLegendre;
use std::num::NonZeroUsize;
use std::sync::Arc;
use weights::StepWeight;

use crate::TransplantError;

const MAX_BITS: u32 = 30;

fn require_unit_root(w: &StepWeight, what: &str) -> Result<(), TransplantError> {
    let root = w.root();
    let ok = root.level() == 0
        && root.side() == Dyadic::ONE
        && (0..root.dim()).all(|j| root.lower(j) == Dyadic::ZERO);
    if ok {
        Ok(())
    } else {
        Err(TransplantError::BadParameter(format!(
            "{what} must live on the unit cube [0,1)^n, got root {root}"
        )))
    }
}

/// Even reflection of a unit-cube weight in every coordinate, giving a
/// weight on [0,2)^n with the same cell size (depth grows by one).  Mass
/// multiplies by 2^n and every unit sub-cube carries the original mass.
pub fn reflect(w: &StepWeight) -> Result<StepWeight, TransplantError> {
    require_unit_root(w, "reflection input")?;
    let dim = w.dim();
    let d = w.depth();
    let out_depth = d + 1;
    if (dim as u32) * out_depth > MAX_BITS {
        return Err(TransplantError::BadParameter(format!(
            "reflected depth {out_depth} in dimension {dim} exceeds the resolution cap"
        )));
    }
    let root = Cube::new(
        Arc::new(RootBox::new(vec![Dyadic::ZERO; dim], Dyadic::from_int(2))?),
        0,
        vec![0; dim],
    )?;
    let out_side = 1usize << out_depth;
    let half = 1usize << d;
    let mut values = vec![0.0; out_side.pow(dim as u32)];
    let mut idx = vec![0usize; dim];
    for v in values.iter_mut() {
        let mut src_flat = 0usize;
        for &g in &idx {
            let s = if g < half { g } else { out_side - 1 - g };
            src_flat = src_flat * half + s;
        }
        *v = w.values()[src_flat];
        for j in (0..dim).rev() {
            idx[j] += 1;
            if idx[j] < out_side {
                break;
            }
            idx[j] = 0;
        }
    }
    Ok(StepWeight::new(root, out_depth, values)?)
}

/// Reflect to [0,2)^n, then extend 2-periodically over the window [−L,L)^n.
/// The half-width must be a power of two so the window is dyadic.
pub fn reflect_tile(w: &StepWeight, l: u32) -> Result<StepWeight, TransplantError> {
    if l < 1 {
        return Err(TransplantError::WindowTooSmall(l));
    }
    if !l.is_power_of_two() {
        return Err(TransplantError::BadParameter(format!(
            "window half-width {l} must be a power of two to align with the dyadic grid"
        )));
    }
    require_unit_root(w, "reflection input")?;
    let dim = w.dim();
    let d = w.depth();
    let out_depth = d + 1 + l.trailing_zeros();
    if (dim as u32) * out_depth > MAX_BITS {
        return Err(TransplantError::BadParameter(format!(
            "window depth {out_depth} in dimension {dim} exceeds the resolution cap"
        )));
    }
    let corner = vec![Dyadic::from_int(-(l as i64)); dim];
    let side = Dyadic::from_int(2 * l as i64);
    let root = Cube::new(Arc::new(RootBox::new(corner, side)?), 0, vec![0; dim])?;

    let out_side = 1usize << out_depth;
    let period = 1usize << (d + 1);
    let half = 1usize << d;
    // the window corner −L sits at phase L·2^d within the period-2 tiling
    let phase = (l as usize) << d;
    let mut values = vec![0.0; out_side.pow(dim as u32)];
    let mut idx = vec![0usize; dim];
    for v in values.iter_mut() {
        let mut src_flat = 0usize;
        for &g in &idx {
            let m = (g + phase) & (period - 1);
            let s = if m < half { m } else { period - 1 - m };
            src_flat = src_flat * half + s;
        }
        *v = w.values()[src_flat];
        for j in (0..dim).rev() {
            idx[j] += 1;
            if idx[j] < out_side {
                break;
            }
            idx[j] = 0;
        }
    }
    Ok(StepWeight::new(root, out_depth, values)?)
}

/// ∫ over the unit cube with integer corner α of dx/(1+|x|)^τ.  One
/// dimension uses the closed-form antiderivative sgn(x)((1+|x|)^{1−τ}−1)/(1−τ);
/// higher dimensions are integrated by adaptive tensor Gauss–Legendre to
/// absolute tolerance 1e−10 (the integrand is smooth, 1+|x| ≥ 1).
pub fn mu_tau_unit_mass(corner: &[i64], tau: f64) -> Result<f64, TransplantError> {
    if !(0.0..1.0).contains(&tau) {
        return Err(TransplantError::BadParameter(format!(
            "decay exponent tau must lie in [0,1), got {tau}"
        )));
    }
    if corner.is_empty() {
        return Err(TransplantError::BadParameter("empty corner".into()));
    }
    if corner.len() == 1 {
        let anti = |x: f64| {
            if tau == 0.0 {
                x
            } else {
                x.signum() * ((1.0 + x.abs()).powf(1.0 - tau) - 1.0) / (1.0 - tau)
            }
        };
        let a = corner[0] as f64;
        return Ok(anti(a + 1.0) - anti(a));
    }
    let f = |x: &[f64]| (1.0 + x.iter().map(|t| t * t).sum::<f64>().sqrt()).powf(-tau);
    let lo: Vec<f64> = corner.iter().map(|&c| c as f64).collect();
    let hi: Vec<f64> = corner.iter().map(|&c| (c + 1) as f64).collect();
    let coarse = GaussLegendre::new(NonZeroUsize::new(8).unwrap());
    let fine = GaussLegendre::new(NonZeroUsize::new(16).unwrap());
    Ok(adaptive_box(&f, &lo, &hi, &coarse, &fine, 1e-10, 0))
}

/// Tensor-product Gauss–Legendre value of `f` over the box.
fn tensor_gl(f: &dyn Fn(&[f64]) -> f64, lo: &[f64], hi: &[f64], rule: &GaussLegendre) -> f64 {
    let dim = lo.len();
    let pairs = rule.as_node_weight_pairs();
    let n = pairs.len();
    // per-axis affine maps from the canonical [-1,1] nodes
    let mid: Vec<f64> = (0..dim).map(|j| 0.5 * (lo[j] + hi[j])).collect();
    let rad: Vec<f64> = (0..dim).map(|j| 0.5 * (hi[j] - lo[j])).collect();
    let jac: f64 = rad.iter().product();
    let mut sum = 0.0;
    let mut odo = vec![0usize; dim];
    let mut x = vec![0.0; dim];
    let total = n.pow(dim as u32);
    for _ in 0..total {
        let mut wprod = 1.0;
        for j in 0..dim {
            let (node, weight) = pairs[odo[j]];
            x[j] = mid[j] + rad[j] * node;
            wprod *= weight;
        }
        sum += wprod * f(&x);
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

fn adaptive_box(
    f: &dyn Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    coarse: &GaussLegendre,
    fine: &GaussLegendre,
    tol: f64,
    depth: u32,
) -> f64 {
    let a = tensor_gl(f, lo, hi, coarse);
    let b = tensor_gl(f, lo, hi, fine);
    if (a - b).abs() <= tol || depth >= 8 {
        return b;
    }
    let dim = lo.len();
    let mut sum = 0.0;
    let child_tol = tol / (1 << dim) as f64;
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
        sum += adaptive_box(f, &clo, &chi, coarse, fine, child_tol, depth + 1);
    }
    sum
}

/// Reflect and tile both weights over [−L,L)^n, then damp by the locally
/// constant factor φ_τ whose value on each integer unit cube is the average
/// of (1+|x|)^{−τ} there.  Returns the damped pair (first, second); the
/// undamped tiling has identical unit-cube masses, the damped one has
/// adjacent-mass ratios equal to the μ_τ cell ratios.
pub fn global_extension(
    sigma: &StepWeight,
    omega: &StepWeight,
    tau: f64,
    l: u32,
) -> Result<(StepWeight, StepWeight), TransplantError> {
    if sigma.dim() != omega.dim() {
        return Err(TransplantError::BadParameter(format!(
            "dimension mismatch: {} vs {}",
            sigma.dim(),
            omega.dim()
        )));
    }
    let mut sig = reflect_tile(sigma, l)?;
    let mut omg = reflect_tile(omega, l)?;
    let dim = sig.dim();
    let span = 2 * l as usize;
    // one φ_τ constant per integer unit cube of the window
    let mut factors = vec![0.0; span.pow(dim as u32)];
    let mut corner = vec![0i64; dim];
    let mut odo = vec![0usize; dim];
    for a in factors.iter_mut() {
        for j in 0..dim {
            corner[j] = odo[j] as i64 - l as i64;
        }
        *a = mu_tau_unit_mass(&corner, tau)?;
        for j in (0..dim).rev() {
            odo[j] += 1;
            if odo[j] < span {
                break;
            }
            odo[j] = 0;
        }
    }
    for w in [&mut sig, &mut omg] {
        let depth = w.depth();
        let per_unit = depth - (1 + l.trailing_zeros()); // cells per unit length: 2^depth_in
        let side = 1usize << depth;
        let mut idx = vec![0usize; dim];
        for v in w.values_mut().iter_mut() {
            let mut cell = 0usize;
            for &g in &idx {
                cell = cell * span + (g >> per_unit);
            }
            *v *= factors[cell];
            for j in (0..dim).rev() {
                idx[j] += 1;
                if idx[j] < side {
                    break;
                }
                idx[j] = 0;
            }
        }
    }
    Ok((sig, omg))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_reflection_mirrors_the_values() {
        let w = StepWeight::new(Cube::unit(1), 1, vec![0.9, 1.1]).unwrap();
        let r = reflect(&w).unwrap();
        // [0,2): original on the left unit, mirror image on the right
        assert_eq!(r.values(), &[0.9, 1.1, 1.1, 0.9]);
        assert_eq!(r.root().side(), Dyadic::from_int(2));
        // an odd window half-width exercises the tiling phase: [-1,1) must be
        // symmetric about 0
        let t = reflect_tile(&w, 1).unwrap();
        assert_eq!(t.values(), &[1.1, 0.9, 0.9, 1.1]);
    }

    #[test]
    fn tiling_is_two_periodic() {
        let w = StepWeight::new(Cube::unit(1), 1, vec![0.25, 1.75]).unwrap();
        let t = reflect_tile(&w, 4).unwrap();
        let vals = t.values();
        assert_eq!(vals.len(), 16);
        for (i, &v) in vals.iter().enumerate() {
            assert_eq!(v, vals[i % 4], "period-2 tiling broken at cell {i}");
        }
    }

    #[test]
    fn window_validation() {
        let w = StepWeight::constant(Cube::unit(1), 1, 1.0).unwrap();
        assert!(matches!(reflect_tile(&w, 0), Err(TransplantError::WindowTooSmall(0))));
        assert!(reflect_tile(&w, 3).is_err());
        let off = StepWeight::constant(Cube::unit(1).child(dyadic_core::Location(0)).unwrap(), 1, 1.0).unwrap();
        assert!(reflect_tile(&off, 2).is_err());
    }

    #[test]
    fn unit_interval_masses_match_the_closed_form() {
        // a_[0,1]/a_[1,2] = (2^0.9 − 1)/(3^0.9 − 2^0.9) at tau = 0.1
        let a0 = mu_tau_unit_mass(&[0], 0.1).unwrap();
        let a1 = mu_tau_unit_mass(&[1], 0.1).unwrap();
        let expect = (2f64.powf(0.9) - 1.0) / (3f64.powf(0.9) - 2f64.powf(0.9));
        assert!((a0 / a1 - expect).abs() < 1e-13);
        assert!((a0 / a1 - 1.054).abs() < 2e-3);
        // mirror symmetry of |x|
        let am1 = mu_tau_unit_mass(&[-1], 0.1).unwrap();
        assert!((am1 - a0).abs() < 1e-14);
    }

    #[test]
    fn vanishing_decay_gives_unit_factors() {
        assert_eq!(mu_tau_unit_mass(&[3], 0.0).unwrap(), 1.0);
        let a = mu_tau_unit_mass(&[2, -1], 1e-9).unwrap();
        assert!((a - 1.0).abs() < 1e-8);
        assert!(mu_tau_unit_mass(&[0], 1.0).is_err());
    }

    #[test]
    fn planar_quadrature_agrees_with_midpoint_refinement() {
        // crude midpoint oracle on a 256^2 grid; the adaptive rule must land
        // well inside the oracle's own error
        let tau = 0.35;
        let a = mu_tau_unit_mass(&[0, 0], tau).unwrap();
        let n = 256;
        let h = 1.0 / n as f64;
        let mut mid = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = (i as f64 + 0.5) * h;
                let y = (j as f64 + 0.5) * h;
                mid += h * h * (1.0 + (x * x + y * y).sqrt()).powf(-tau);
            }
        }
        assert!((a - mid).abs() < 1e-5, "gl {a} vs midpoint {mid}");
    }
}
