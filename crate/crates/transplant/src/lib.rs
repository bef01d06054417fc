//! Scattered rearrangement of step weights along a coarse cube hierarchy.
//!
//! A jump schedule k_1, k_2, ... carves the dyadic tree of the root cube into
//! coarse stages; each coarse cube at stage t is paired with a depth-t dyadic
//! "supervisor" whose descent path mirrors the coarse tower.  Rearranging a
//! weight means giving every stage-t coarse cube the average of the source
//! over its supervisor.  This crate builds those stage functions, the ±1 sign
//! patterns that express stage differences, a boundary-pruned variant whose
//! averages stay comparable on adjacent (not just nested) cubes, and the
//! reflected periodic extension of a weight pair to a large window.

mod extension;
mod modified;
mod sign;
mod state;

pub use extension::{global_extension, mu_tau_unit_mass, reflect, reflect_tile};
pub use modified::{modified_transplant, ModifiedTransplant};
pub use sign::{sign_pattern, SignPattern};
pub use state::{difference_formula_stage, TransplantState};

use dyadic_core::GridError;
use weights::WeightError;

#[derive(Debug, thiserror::Error)]
pub enum TransplantError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error("{0}")]
    BadParameter(String),
    #[error("window half-width {0} is too small; need L >= 1")]
    WindowTooSmall(u32),
    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),
}
