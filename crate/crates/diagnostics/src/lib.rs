//! Testing functionals, doubling diagnostics, and discrepancy bookkeeping
//! for step-weight pairs.
//!
//! Everything here reduces to finite sums and suprema over explicit cube
//! families: dyadic testing sums (`gamma_horizontal`), dyadic and lattice
//! A₂ suprema, the A∞ characteristic, adjacency/flatness ratios, halo
//! masses, and the singular-integral testing quotients evaluated by
//! closed-form per-rectangle kernels under Gauss quadrature.  The
//! `discrepancy` module tracks how testing integrals move from one
//! rearrangement stage to the next and splits the movement into the four
//! cross terms; `weak` pairs oscillating stage differences against fixed
//! test functions to expose their weak decay.  `report` bundles the numbers
//! into a serializable record with golden-file support.

mod discrepancy;
mod report;
mod riesz;
mod sups;
mod testing;
mod weak;

pub use discrepancy::{discrepancy, Discrepancy};
pub use report::{
    assemble_report, compare_reports, run_pool, ReportEntry, ReportMeta, ReportOptions,
    StageDiscrepancy, TestingReport,
};
pub use riesz::{riesz_testing, QuadOptions, RieszTesting};
pub use sups::{
    a2_classical, a2_dyadic, a_infty_char, a_infty_char_scanned, adjacency_constant,
    adjacency_constant_scanned, halo_mass, tau_flat,
};
pub use testing::{gamma_horizontal, square_function_testing, testing_quotient};
pub use weak::{weak_probe, ProbeFamily, ProbeKind};

use dyadic_core::GridError;
use pushforward::PushError;
use singular_ops::SingularOpsError;
use transplant::TransplantError;
use weights::WeightError;

#[derive(Debug, thiserror::Error)]
pub enum DiagError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Transplant(#[from] TransplantError),
    #[error(transparent)]
    Ops(#[from] SingularOpsError),
    #[error(transparent)]
    Push(#[from] PushError),
    #[error("{0}")]
    BadParameter(String),
    #[error("scan depth {requested} exceeds the available resolution {available}")]
    ScanTooDeep { requested: u32, available: u32 },
    #[error("zero cell at {0}: the characteristic is infinite")]
    InfiniteCharacteristic(String),
    #[error("halo width {halo} is thinner than a grid cell ({cell})")]
    HaloTooThin { halo: f64, cell: f64 },
    #[error("quadrature error estimate {achieved:e} exceeds the tolerance {requested:e}")]
    ToleranceNotMet { achieved: f64, requested: f64 },
    #[error("the testing cube carries no sigma mass")]
    ZeroMass,
    #[error("{0}")]
    Unsupported(String),
    #[error("report mismatch: {0}")]
    GoldenMismatch(String),
    #[error(transparent)]
    Format(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
