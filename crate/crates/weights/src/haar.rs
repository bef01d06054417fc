use dyadic_core::Cube;

use crate::step_weight::{pairwise_sum, StepWeight};
use crate::WeightError;

/// Number of Haar directions in `dim` dimensions (2^dim − 1).
pub fn direction_count(dim: usize) -> u32 {
    (1u32 << dim) - 1
}

/// Sign of the direction-`mask` Haar function on child `theta` (child labels
/// as in `Cube::child`: bit j set = upper half in axis j).
///
/// Direction masks select which axes carry a one-dimensional Haar factor
/// (positive on the lower half); bit 0 is the horizontal direction.  The 2D
/// mask-3 pattern is negated so the four signs are − + / + − (positive at NW
/// and SE), matching the printed checkerboard convention.
pub fn direction_sign(dim: usize, mask: u32, theta: u32) -> f64 {
    debug_assert!(mask >= 1 && mask <= direction_count(dim));
    let mut s = if (mask & theta).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    if dim == 2 && mask == 3 {
        s = -s;
    }
    s
}

/// ⟨W, h_Q^direction⟩ for the L²-normalized Haar function on Q:
/// √|Q| · 2^{−dim} · Σ_θ sign(θ) · E_{Q_θ}W.
pub fn haar_coefficient(w: &StepWeight, q: &Cube, direction: u32) -> Result<f64, WeightError> {
    let dim = w.dim();
    let max = direction_count(dim);
    if direction == 0 || direction > max {
        return Err(WeightError::BadDirection { dir: direction, max });
    }
    if q.level() >= w.root().level() + w.depth() {
        return Err(WeightError::FinerThanResolution);
    }
    // children() is row-major, not location-coded; index by each child's
    // location bits so the signs land on the right octants.
    let mut signed = vec![0.0; 1 << dim];
    for child in q.children()? {
        let theta = child.location_in_parent().0;
        signed[theta as usize] = direction_sign(dim, direction, theta) * w.average(&child)?;
    }
    Ok(q.volume().sqrt() * pairwise_sum(&signed) / signed.len() as f64)
}

/// All Haar coefficients of a weight, stored per level in the same row-major
/// order as the grid, with the 2^dim − 1 directions contiguous per cube.
#[derive(Debug, Clone)]
pub struct HaarSpectrum {
    root: Cube,
    depth: u32,
    mean: f64,
    /// coeffs[l][flat * masks + (mask − 1)] for l < depth.
    coeffs: Vec<Vec<f64>>,
}

impl HaarSpectrum {
    pub fn root(&self) -> &Cube {
        &self.root
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn direction_count(&self) -> u32 {
        direction_count(self.root.dim())
    }

    /// Coefficient for a cube of the analyzed grid (relative level < depth).
    pub fn coefficient(&self, q: &Cube, direction: u32) -> Result<f64, WeightError> {
        let dim = self.root.dim();
        let max = direction_count(dim);
        if direction == 0 || direction > max {
            return Err(WeightError::BadDirection { dir: direction, max });
        }
        if !q.same_root(&self.root) || q.level() < self.root.level() {
            return Err(WeightError::OutsideRoot);
        }
        let rel = q.level() - self.root.level();
        if rel >= self.depth {
            return Err(WeightError::FinerThanResolution);
        }
        let side = 1u64 << rel;
        let mut flat = 0usize;
        for (j, &qi) in q.index().iter().enumerate() {
            let base = self.root.index()[j];
            if qi >> rel != base {
                return Err(WeightError::OutsideRoot);
            }
            flat = flat * side as usize + (qi - (base << rel)) as usize;
        }
        Ok(self.coeffs[rel as usize][flat * max as usize + (direction - 1) as usize])
    }

    /// Σ over cubes at one relative level of Σ_direction coeff².
    pub fn level_energy(&self, rel_level: u32) -> f64 {
        let sq: Vec<f64> = self.coeffs[rel_level as usize].iter().map(|c| c * c).collect();
        pairwise_sum(&sq)
    }

    /// Rebuild the step weight by telescoping: start from the mean and add
    /// each level's martingale difference.
    pub fn reconstruct(&self) -> Result<StepWeight, WeightError> {
        let dim = self.root.dim();
        let masks = direction_count(dim) as usize;
        let mut vals = vec![self.mean];
        for l in 0..self.depth {
            let side = 1usize << l;
            let n = side.pow(dim as u32);
            let fine_side = side * 2;
            let fine_n = fine_side.pow(dim as u32);
            let mut fine = vec![0.0; fine_n];
            // |Q| = (root side / 2^l)^dim
            let root_side = self.root.side().to_f64();
            let vol = (root_side / side as f64).powi(dim as i32);
            let scale = 1.0 / vol.sqrt();
            for flat in 0..n {
                // decode coarse per-axis indices
                let mut idx = vec![0usize; dim];
                let mut rem = flat;
                for j in (0..dim).rev() {
                    idx[j] = rem % side;
                    rem /= side;
                }
                let base = vals[flat];
                for theta in 0..(1usize << dim) {
                    let mut delta = 0.0;
                    for mask in 1..=masks as u32 {
                        let c = self.coeffs[l as usize][flat * masks + (mask - 1) as usize];
                        delta += c * direction_sign(dim, mask, theta as u32) * scale;
                    }
                    let mut fine_flat = 0usize;
                    for (j, &ij) in idx.iter().enumerate() {
                        let fij = 2 * ij + (theta >> j & 1);
                        fine_flat = fine_flat * fine_side + fij;
                    }
                    fine[fine_flat] = base + delta;
                }
            }
            vals = fine;
        }
        StepWeight::new(self.root.clone(), self.depth, vals)
    }
}

/// Full Haar analysis of a weight via its average pyramid.
pub fn haar_spectrum(w: &StepWeight) -> HaarSpectrum {
    let dim = w.dim();
    let masks = direction_count(dim) as usize;
    let pyramid = w.average_pyramid();
    let root_side = w.root().side().to_f64();
    let mut coeffs = Vec::with_capacity(w.depth() as usize);
    let mut child_buf = vec![0.0; 1 << dim];
    let mut signed_buf = vec![0.0; 1 << dim];
    for l in 0..w.depth() {
        let side = 1usize << l;
        let n = side.pow(dim as u32);
        let fine_side = side * 2;
        let fine = &pyramid[l as usize + 1];
        let vol = (root_side / side as f64).powi(dim as i32);
        let sqrt_vol = vol.sqrt();
        let mut level = vec![0.0; n * masks];
        for flat in 0..n {
            let mut idx = vec![0usize; dim];
            let mut rem = flat;
            for j in (0..dim).rev() {
                idx[j] = rem % side;
                rem /= side;
            }
            for (theta, c) in child_buf.iter_mut().enumerate() {
                let mut fine_flat = 0usize;
                for (j, &ij) in idx.iter().enumerate() {
                    let fij = 2 * ij + (theta >> j & 1);
                    fine_flat = fine_flat * fine_side + fij;
                }
                *c = fine[fine_flat];
            }
            for mask in 1..=masks as u32 {
                for (theta, s) in signed_buf.iter_mut().enumerate() {
                    *s = direction_sign(dim, mask, theta as u32) * child_buf[theta];
                }
                level[flat * masks + (mask - 1) as usize] =
                    sqrt_vol * pairwise_sum(&signed_buf) / signed_buf.len() as f64;
            }
        }
        coeffs.push(level);
    }
    HaarSpectrum {
        root: w.root().clone(),
        depth: w.depth(),
        mean: w.mean(),
        coeffs,
    }
}
