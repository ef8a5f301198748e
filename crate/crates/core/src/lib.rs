//! Explainable workforce scheduling.
//!
//! A [`ProblemInstance`] describes operators, jobs and instruments; a
//! [`Schedule`] assigns and orders jobs per operator and allocates
//! instruments. Schedules are checked by building abstract argumentation
//! frameworks ([`af::ArgGraph`]) whose attacks encode feasibility,
//! efficiency, skill and instrument constraints. Attacks (and missing
//! attacks) are turned into [`explain::Explanation`]s with concrete repair
//! moves, and the [`solver`] module searches for schedules that pass every
//! check.

pub mod af;
pub mod builders;
pub mod cost;
pub mod error;
pub mod exchange;
pub mod exec;
pub mod explain;
pub mod format;
pub mod model;
pub mod moves;
pub mod solver;
pub mod tolerance;

pub use error::{Blocker, Error, Result};
pub use model::{
    distance, validate_instance, FixedDecisions, InstanceError, InstrumentIx, InstrumentSpec,
    JobIx, JobSpec, OperatorIx, OperatorSpec, Point, ProblemInstance, Schedule,
};
