//! Exact dyadic grid geometry: cubes with dyadic-rational coordinates,
//! descent bookkeeping (location vectors), sparse jump schedules with their
//! coarse grids and supervisor map, pruned hierarchies with transition
//! cubes, and halo regions.
//!
//! Everything is relative to a finite root box, cubes are half-open
//! products `[a, b)`, and all geometric predicates are decided in exact
//! arithmetic.

mod cube;
mod dyadic;
mod halo;
mod schedule;

pub use cube::{Cube, Location, LocationVector, RootBox};
pub use dyadic::Dyadic;
pub use halo::{halo, BoxF, HaloRegions};
pub use schedule::{
    jump_grid_level, supervisor, transition_cubes, transition_stages, JumpSchedule, StageSets,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("invalid root box: {0}")]
    BadRoot(String),
    #[error("invalid cube index: {0}")]
    BadIndex(String),
    #[error("grid resolution overflow at level {level}")]
    ResolutionOverflow { level: u32 },
    #[error("invalid jump schedule: {0}")]
    BadSchedule(String),
    #[error("stage {t} outside 1..={stages}")]
    StageOutOfRange { t: usize, stages: usize },
    #[error("cube depth {depth} is not a cumulative jump depth")]
    NotOnJumpGrid { depth: u32 },
    #[error("cubes do not share a root box")]
    RootMismatch,
    #[error("halo width delta = {delta} outside (0, 1/2)")]
    BadHaloWidth { delta: f64 },
}
