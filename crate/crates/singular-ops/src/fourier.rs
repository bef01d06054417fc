use dyadic_core::Cube;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use weights::StepWeight;

use crate::consts::constants;
use crate::quadrature::{KernelKind, KernelSpec};
use crate::SingularOpsError;

/// A real function sampled on a periodic grid, row-major with axis 0
/// slowest.  The torus is normalized to [0,1)^n; the symbols applied to it
/// are homogeneous of degree zero, so the physical box size never enters.
#[derive(Debug, Clone)]
pub struct GridFn {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl GridFn {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self, SingularOpsError> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(SingularOpsError::BadParameter("empty grid".into()));
        }
        let total: usize = dims.iter().product();
        if data.len() != total {
            return Err(SingularOpsError::BadParameter(format!(
                "expected {total} samples for dims {dims:?}, got {}",
                data.len()
            )));
        }
        Ok(GridFn { dims, data })
    }

    pub fn from_fn(
        dims: Vec<usize>,
        f: impl Fn(&[usize]) -> f64,
    ) -> Result<Self, SingularOpsError> {
        let total: usize = dims.iter().product();
        if dims.is_empty() || total == 0 {
            return Err(SingularOpsError::BadParameter("empty grid".into()));
        }
        let mut idx = vec![0usize; dims.len()];
        let mut data = Vec::with_capacity(total);
        for _ in 0..total {
            data.push(f(&idx));
            for j in (0..dims.len()).rev() {
                idx[j] += 1;
                if idx[j] < dims[j] {
                    break;
                }
                idx[j] = 0;
            }
        }
        Ok(GridFn { dims, data })
    }

    /// Samples of a step weight on its own cell grid.
    pub fn from_step_weight(w: &StepWeight) -> GridFn {
        GridFn { dims: vec![w.side_cells(); w.dim()], data: w.values().to_vec() }
    }

    /// Reinterpret the samples as a step weight on `root`; needs a cubic
    /// grid with power-of-two side.
    pub fn to_step_weight(&self, root: Cube) -> Result<StepWeight, SingularOpsError> {
        let side = self.dims[0];
        if self.dims.iter().any(|&d| d != side) || !side.is_power_of_two() {
            return Err(SingularOpsError::BadParameter(format!(
                "grid {:?} is not a power-of-two cube",
                self.dims
            )));
        }
        if root.dim() != self.dims.len() {
            return Err(SingularOpsError::BadParameter("dimension mismatch".into()));
        }
        Ok(StepWeight::new(root, side.trailing_zeros(), self.data.clone())?)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Crude wrap-around bound for the periodization the multiplier acts on:
/// kernel size times data mass over the gap between the support and its
/// nearest periodic image, infinite when the support spans the window.
#[derive(Debug, Clone, Copy)]
pub struct TailEstimate {
    /// Smallest per-axis gap around the support, in torus units.
    pub gap: f64,
    pub bound: f64,
}

/// Applies the Fourier multiplier of the kernel on the periodic grid:
/// −i·sgn ξ for the Hilbert transform, −i ξ_j/|ξ| for Riesz, and the
/// composed power (−i)^N ξ^β/|ξ|^N for iterated Riesz.  The ξ = 0
/// coefficient and Nyquist rows (sign-ambiguous) are zeroed.
pub fn fft_multiplier(
    spec: &KernelSpec,
    g: &GridFn,
) -> Result<(GridFn, TailEstimate), SingularOpsError> {
    let n = spec.dim();
    if g.dims.len() != n {
        return Err(SingularOpsError::BadParameter(format!(
            "grid dimension {} does not match kernel dimension {n}",
            g.dims.len()
        )));
    }
    if g.dims.iter().any(|&d| !d.is_power_of_two()) {
        return Err(SingularOpsError::BadParameter(format!(
            "grid sizes {:?} must be powers of two",
            g.dims
        )));
    }
    let tail = tail_estimate(spec, g);
    let mut buf: Vec<Complex<f64>> =
        g.data.iter().map(|&v| Complex::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    for axis in 0..n {
        fft_axis(&mut buf, &g.dims, axis, &mut planner, true);
    }

    let total = buf.len();
    let mut idx = vec![0usize; n];
    let mut freq = vec![0f64; n];
    for v in buf.iter_mut() {
        let mut nyquist = false;
        for j in 0..n {
            let m = idx[j];
            let half = g.dims[j] / 2;
            if m == half && g.dims[j] > 1 {
                nyquist = true;
            }
            freq[j] = if m <= half { m as f64 } else { m as f64 - g.dims[j] as f64 };
        }
        *v *= symbol(&spec.kind, &freq, nyquist);
        for j in (0..n).rev() {
            idx[j] += 1;
            if idx[j] < g.dims[j] {
                break;
            }
            idx[j] = 0;
        }
    }

    for axis in 0..n {
        fft_axis(&mut buf, &g.dims, axis, &mut planner, false);
    }
    let scale = 1.0 / total as f64;
    let data: Vec<f64> = buf.iter().map(|c| c.re * scale).collect();
    Ok((GridFn { dims: g.dims.clone(), data }, tail))
}

fn symbol(kind: &KernelKind, freq: &[f64], nyquist: bool) -> Complex<f64> {
    let norm2: f64 = freq.iter().map(|f| f * f).sum();
    if nyquist || norm2 == 0.0 {
        return Complex::new(0.0, 0.0);
    }
    let minus_i = Complex::new(0.0, -1.0);
    match kind {
        KernelKind::Hilbert => minus_i * freq[0].signum(),
        KernelKind::Riesz { axis, .. } => minus_i * (freq[axis - 1] / norm2.sqrt()),
        KernelKind::IteratedRiesz { beta, .. } => {
            let order: u32 = beta.iter().sum();
            let mut mag = 1.0;
            for (j, &b) in beta.iter().enumerate() {
                mag *= (freq[j] / norm2.sqrt()).powi(b as i32);
            }
            minus_i.powu(order) * mag
        }
    }
}

// in-place FFT along one axis of a row-major tensor
fn fft_axis(
    buf: &mut [Complex<f64>],
    dims: &[usize],
    axis: usize,
    planner: &mut FftPlanner<f64>,
    forward: bool,
) {
    let len = dims[axis];
    if len == 1 {
        return;
    }
    let fft =
        if forward { planner.plan_fft_forward(len) } else { planner.plan_fft_inverse(len) };
    let stride: usize = dims[axis + 1..].iter().product();
    let outer: usize = dims[..axis].iter().product();
    let block = stride * len;
    let mut line = vec![Complex::new(0.0, 0.0); len];
    for o in 0..outer {
        for s in 0..stride {
            let base = o * block + s;
            for (i, l) in line.iter_mut().enumerate() {
                *l = buf[base + i * stride];
            }
            fft.process(&mut line);
            for (i, l) in line.iter().enumerate() {
                buf[base + i * stride] = *l;
            }
        }
    }
}

fn tail_estimate(spec: &KernelSpec, g: &GridFn) -> TailEstimate {
    let n = g.dims.len();
    // support bounding box per axis
    let mut min_idx = vec![usize::MAX; n];
    let mut max_idx = vec![0usize; n];
    let mut idx = vec![0usize; n];
    let mut l1 = 0.0;
    let cell: f64 = g.dims.iter().map(|&d| 1.0 / d as f64).product();
    for &v in &g.data {
        if v != 0.0 {
            l1 += v.abs() * cell;
            for j in 0..n {
                min_idx[j] = min_idx[j].min(idx[j]);
                max_idx[j] = max_idx[j].max(idx[j]);
            }
        }
        for j in (0..n).rev() {
            idx[j] += 1;
            if idx[j] < g.dims[j] {
                break;
            }
            idx[j] = 0;
        }
    }
    if l1 == 0.0 {
        return TailEstimate { gap: 1.0, bound: 0.0 };
    }
    let gap = (0..n)
        .map(|j| (g.dims[j] - (max_idx[j] - min_idx[j] + 1)) as f64 / g.dims[j] as f64)
        .fold(f64::INFINITY, f64::min);
    if gap <= 0.0 {
        return TailEstimate { gap: 0.0, bound: f64::INFINITY };
    }
    let kappa = match &spec.kind {
        KernelKind::Hilbert => 1.0 / PI,
        _ => constants(spec.dim()).map(|c| c.c_n).unwrap_or(1.0),
    };
    let images = 3f64.powi(n as i32) - 1.0;
    TailEstimate { gap, bound: kappa * l1 * images / gap.powi(n as i32) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(GridFn::new(vec![4, 3], vec![0.0; 12]).is_ok());
        assert!(GridFn::new(vec![4], vec![0.0; 3]).is_err());
        let g = GridFn::new(vec![6], vec![0.0; 6]).unwrap();
        assert!(matches!(
            fft_multiplier(&KernelSpec::hilbert(), &g),
            Err(SingularOpsError::BadParameter(_))
        ));
        let h = GridFn::new(vec![4, 4], vec![0.0; 16]).unwrap();
        assert!(fft_multiplier(&KernelSpec::hilbert(), &h).is_err());
    }

    #[test]
    fn single_mode_rotates_by_a_quarter_period() {
        // the −i·sgn symbol sends cos to sin and sin to −cos
        let nn = 64;
        let cos = GridFn::from_fn(vec![nn], |i| (2.0 * PI * i[0] as f64 / nn as f64).cos()).unwrap();
        let sin = GridFn::from_fn(vec![nn], |i| (2.0 * PI * i[0] as f64 / nn as f64).sin()).unwrap();
        let (h_cos, _) = fft_multiplier(&KernelSpec::hilbert(), &cos).unwrap();
        let (h_sin, _) = fft_multiplier(&KernelSpec::hilbert(), &sin).unwrap();
        for i in 0..nn {
            assert!((h_cos.data()[i] - sin.data()[i]).abs() < 1e-12);
            assert!((h_sin.data()[i] + cos.data()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_and_nyquist_rows_are_annihilated() {
        let nn = 8;
        // constant plus pure Nyquist oscillation
        let g = GridFn::from_fn(vec![nn], |i| 2.5 + if i[0] % 2 == 0 { 1.0 } else { -1.0 })
            .unwrap();
        let (h, _) = fft_multiplier(&KernelSpec::hilbert(), &g).unwrap();
        for &v in h.data() {
            assert!(v.abs() < 1e-13);
        }
    }

    #[test]
    fn tail_estimate_reflects_padding() {
        let mut data = vec![0.0; 32];
        data[14] = 1.0;
        data[15] = 1.0;
        let padded = GridFn::new(vec![32], data).unwrap();
        let (_, t) = fft_multiplier(&KernelSpec::hilbert(), &padded).unwrap();
        assert!(t.gap > 0.9 && t.bound.is_finite());
        let full = GridFn::new(vec![8], vec![1.0; 8]).unwrap();
        let (_, t2) = fft_multiplier(&KernelSpec::hilbert(), &full).unwrap();
        assert_eq!(t2.gap, 0.0);
        assert!(t2.bound.is_infinite());
    }

    #[test]
    fn step_weight_round_trip() {
        let w = StepWeight::new(Cube::unit(2), 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let g = GridFn::from_step_weight(&w);
        assert_eq!(g.dims(), &[2, 2]);
        let back = g.to_step_weight(Cube::unit(2)).unwrap();
        assert_eq!(back.values(), w.values());
    }
}
