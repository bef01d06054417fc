//! Piecewise-constant weights on dyadic grids.
//!
//! A [`StepWeight`] stores one density value per cell of `𝒟_m(root)` and is
//! the common currency of the whole workspace: multiplicative cascades, Haar
//! spectra, stopping families, and the bisection construction of flat weight
//! pairs with a prescribed horizontal testing value all live here.
//!
//! Conventions (shared with `dyadic-core`): cells are half-open, the value
//! array is row-major with axis 0 slowest, and "horizontal" always means the
//! first coordinate axis.

mod cascade;
mod haar;
mod mc;
mod nazarov;
mod step_weight;
mod stopping;

pub use cascade::{cascade, exact_testing_value, large_doubling_variant, CascadeParams};
pub use haar::{direction_count, direction_sign, haar_coefficient, haar_spectrum, HaarSpectrum};
pub use mc::{hitting_mc, wilson_interval, McEstimate};
pub use nazarov::{gamma_pair_exact, nazarov_pair, NazarovPair};
pub use step_weight::{tensorize, StepWeight};
pub use stopping::{hitting_probability_exact, stopping_cubes, stopping_mass};

use dyadic_core::GridError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("grid error: {0}")]
    Grid(#[from] GridError),
    #[error("value array has length {got}, the grid has {want} cells")]
    BadLength { got: usize, want: usize },
    #[error("resolution out of range: dim {dim} at depth {depth} exceeds the 2^30-cell cap")]
    TooFine { dim: usize, depth: u32 },
    #[error("cube is finer than the weight resolution")]
    FinerThanResolution,
    #[error("cube lies outside the weight's root (or on a different grid)")]
    OutsideRoot,
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("direction index {dir} out of range 1..={max}")]
    BadDirection { dir: u32, max: u32 },
    #[error(
        "testing value {x3} unreachable at depth cap {depth_cap}: best gamma {best_gamma} \
         over epsilon bracket [{lo}, {hi}]"
    )]
    TargetUnreachable {
        x3: f64,
        best_gamma: f64,
        lo: f64,
        hi: f64,
        depth_cap: u32,
    },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed weight file: {0}")]
    BadFormat(String),
}
