//! Hilbert and Riesz transforms on step weights.
//!
//! Three evaluation backends with different trade-offs:
//!
//! * exact closed forms for indicators ([`hilbert_step`], [`riesz_rect`]),
//! * principal-value quadrature against arbitrary step weights
//!   ([`riesz_quad`]), with the singular cell handled by odd cancellation
//!   over a centered cube,
//! * a periodic Fourier-multiplier backend ([`fft_multiplier`]) for the
//!   symbols −i·sgn ξ, −i ξ_j/|ξ| and their iterates.
//!
//! The normalization constants c_n, A_k, B_n live in [`constants`].

use thiserror::Error;

mod closed_forms;
mod consts;
mod fourier;
mod quadrature;
mod rotation;
mod series;

pub use closed_forms::{hilbert_step, riesz_rect, Rect2};
pub use consts::{constants, gamma_half_integer, RieszConstants};
pub use fourier::{fft_multiplier, GridFn, TailEstimate};
pub use quadrature::{riesz_quad, KernelKind, KernelSpec};
pub use rotation::{exposed_coefficient, rotation_exposing, ExposingRotation};
pub use series::alt_series_bound_check;

#[derive(Debug, Error)]
pub enum SingularOpsError {
    #[error("grid error: {0}")]
    Grid(#[from] dyadic_core::GridError),
    #[error("weight error: {0}")]
    Weight(#[from] weights::WeightError),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("evaluation point on a boundary: {0}")]
    BoundaryPoint(String),
    #[error("unsupported kernel: {0}")]
    Unsupported(String),
    #[error("quadrature tolerance {requested} not reached; achieved about {achieved}")]
    QuadratureBudget { requested: f64, achieved: f64 },
}
