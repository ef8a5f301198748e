use std::fmt;

use crate::model::{InstrumentIx, JobIx};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("no feasible schedule exists: {}", BlockerList(.0))]
    Infeasible(Vec<Blocker>),

    #[error("search space of {size} schedules exceeds the limit of {limit}")]
    BoundExceeded { size: u128, limit: u128 },

    /// A move no longer matches the schedule it is applied to.
    #[error("stale move: {0}")]
    Conflict(String),

    #[error("search cancelled before completion")]
    Cancelled,
}

/// Why no feasible schedule exists.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Blocker {
    /// No operator holds `skill`, which `job` requires.
    Skill { job: JobIx, skill: String },
    /// The instrument cannot be placed with the job (or, without a job, no
    /// operator is qualified to hold it at all).
    Instrument {
        job: Option<JobIx>,
        instrument: InstrumentIx,
    },
}

struct BlockerList<'a>(&'a [Blocker]);

impl fmt::Display for BlockerList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, b) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            match b {
                Blocker::Skill { job, skill } => {
                    write!(f, "job #{} needs skill {skill}", job.0)?
                }
                Blocker::Instrument {
                    job: Some(job),
                    instrument,
                } => write!(f, "job #{} cannot be paired with instrument #{}", job.0, instrument.0)?,
                Blocker::Instrument {
                    job: None,
                    instrument,
                } => write!(f, "no operator may hold instrument #{}", instrument.0)?,
            }
        }
        Ok(())
    }
}
