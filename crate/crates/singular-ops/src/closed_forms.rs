use dyadic_core::Cube;
use std::f64::consts::PI;
use weights::StepWeight;

use crate::consts::constants;
use crate::SingularOpsError;

/// Hilbert transform of a 1D step weight, H W(x) = (1/π) pv ∫ W(y)/(x−y) dy.
///
/// Writing the sum of per-cell logarithms by breakpoints,
/// H W(x) = (1/π) Σ_p (jump of W at p)·ln|x−p|,
/// with the exterior value taken as 0.  When x lands exactly on a
/// breakpoint, the local logarithm is dropped — that is the symmetric
/// principal value there (finite only when W has no jump at x).
pub fn hilbert_step(w: &StepWeight, x: f64) -> Result<f64, SingularOpsError> {
    if w.dim() != 1 {
        return Err(SingularOpsError::BadParameter(format!(
            "Hilbert transform needs a 1D weight, got dimension {}",
            w.dim()
        )));
    }
    let cells = w.cells();
    let lo = w.root().lower(0).to_f64();
    let h = w.root().side().to_f64() / cells as f64;
    let mut sum = 0.0;
    for i in 0..=cells {
        let left = if i == 0 { 0.0 } else { w.values()[i - 1] };
        let right = if i == cells { 0.0 } else { w.values()[i] };
        let jump = right - left;
        let p = lo + i as f64 * h;
        if jump != 0.0 && x != p {
            sum += jump * (x - p).abs().ln();
        }
    }
    Ok(sum / PI)
}

/// A closed axis-aligned rectangle [x0,x1] × [y0,y1] in the plane.
#[derive(Debug, Clone, Copy)]
pub struct Rect2 {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl Rect2 {
    pub fn new(x: [f64; 2], y: [f64; 2]) -> Result<Self, SingularOpsError> {
        if x[0] < x[1] && y[0] < y[1] {
            Ok(Rect2 { x, y })
        } else {
            Err(SingularOpsError::BadParameter(format!(
                "degenerate rectangle [{}, {}] x [{}, {}]",
                x[0], x[1], y[0], y[1]
            )))
        }
    }

    pub fn from_cube(q: &Cube) -> Result<Self, SingularOpsError> {
        if q.dim() != 2 {
            return Err(SingularOpsError::BadParameter(format!(
                "rectangle from a cube needs dimension 2, got {}",
                q.dim()
            )));
        }
        Rect2::new(
            [q.lower(0).to_f64(), q.upper(0).to_f64()],
            [q.lower(1).to_f64(), q.upper(1).to_f64()],
        )
    }

    fn on_boundary(&self, p: [f64; 2]) -> bool {
        let inside_x = self.x[0] <= p[0] && p[0] <= self.x[1];
        let inside_y = self.y[0] <= p[1] && p[1] <= self.y[1];
        inside_x
            && inside_y
            && (p[0] == self.x[0] || p[0] == self.x[1] || p[1] == self.y[0] || p[1] == self.y[1])
    }
}

// ∫_{t_b}^{t_a} dt/√(t² + β²): asinh difference, degenerating to a
// logarithm when β = 0 and the range keeps one sign.
fn slab_integral(t_a: f64, t_b: f64, beta: f64) -> f64 {
    if beta != 0.0 {
        (t_a / beta.abs()).asinh() - (t_b / beta.abs()).asinh()
    } else {
        t_a.signum() * (t_a.abs().ln() - t_b.abs().ln())
    }
}

/// Planar Riesz transform of a rectangle indicator,
/// R_j 1_rect(x) = c₂ pv ∫_rect (x_j−y_j)/|x−y|³ dy, in closed form.
///
/// Integrating the kernel over y₂ first gives a difference of
/// 1/√(s²+β²) slabs, and the outer y₁ integral of each slab is the asinh
/// expression in `slab_integral`; axis 1 follows by swapping coordinates.
pub fn riesz_rect(axis: usize, rect: &Rect2, x: [f64; 2]) -> Result<f64, SingularOpsError> {
    match axis {
        1 => {
            let swapped = Rect2 { x: rect.y, y: rect.x };
            riesz_rect(2, &swapped, [x[1], x[0]])
        }
        2 => {
            if rect.on_boundary(x) {
                return Err(SingularOpsError::BoundaryPoint(format!(
                    "({}, {}) lies on the rectangle boundary",
                    x[0], x[1]
                )));
            }
            let c2 = constants(2)?.c_n;
            let t_a = x[0] - rect.x[0];
            let t_b = x[0] - rect.x[1];
            let val = slab_integral(t_a, t_b, x[1] - rect.y[1])
                - slab_integral(t_a, t_b, x[1] - rect.y[0]);
            Ok(c2 * val)
        }
        _ => Err(SingularOpsError::BadParameter(format!("planar axis must be 1 or 2, got {axis}"))),
    }
}
