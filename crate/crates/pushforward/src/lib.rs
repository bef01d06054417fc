//! Measures under change of variables, and what that does to two-weight
//! quantities.
//!
//! The crate has three layers:
//!
//! * [`Measure`] — step densities, finite atom lists, and the depth-truncated
//!   middle-thirds Cantor measure, with box masses and serialization;
//! * maps — increasing piecewise-linear maps of the line ([`PLMap1D`]),
//!   rotations with exact quarter-turn composites ([`RotationMap`]), and
//!   their compositions ([`MapSpec`]), pushed forward by [`pushforward`];
//! * checks — [`a2_stability_check`] measures how the two-weight A₂ quantity
//!   moves under a map, [`homeo_condition_check`] tests the bounded
//!   inverse-volume condition that characterizes A₂-stable homeomorphisms,
//!   and [`cantor_instability_demo`] builds the explicit gap-atom pair that a
//!   biLipschitz map carries onto a perturbed twin with the same Cantor
//!   ground measure.

mod cantor;
mod maps;
mod measure;
mod push;
mod stability;

pub use cantor::{
    band_bilip_bound, cantor_instability_demo, cantor_pair, CantorDemoConfig, CantorDemoReport,
    CantorGrid, Gap, StageMassRule,
};
pub use maps::{
    GeneralRotation, MapSpec, MonotoneMap1D, PLMap1D, PowerMap, RotationMap, SignedPermutation,
};
pub use measure::{Atom, Measure};
pub use push::pushforward;
pub use stability::{
    a2_stability_check, homeo_condition_check, HomeoReport, ScanFamily, StabilityReport,
};

use dyadic_core::GridError;
use weights::WeightError;

#[derive(Debug, thiserror::Error)]
pub enum PushError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error("bad measure: {0}")]
    BadMeasure(String),
    #[error("bad map: {0}")]
    BadMap(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("placement outside the separation band: {0}")]
    BadPlacement(String),
    #[error("scan family is empty")]
    EmptyScan,
    #[error("serialization: {0}")]
    Format(#[from] serde_json::Error),
}
