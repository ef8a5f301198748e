//! Schedule edits: the repairs suggested by explanations and applied by
//! local search.

use crate::error::{Error, Result};
use crate::model::{InstrumentIx, JobIx, OperatorIx, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MoveKind {
    RelocateInter,
    SwapInter,
    RelocateIntra,
    SwapIntra,
    MoveInstrument,
}

impl MoveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MoveKind::RelocateInter => "relocate-inter",
            MoveKind::SwapInter => "swap-inter",
            MoveKind::RelocateIntra => "relocate-intra",
            MoveKind::SwapIntra => "swap-intra",
            MoveKind::MoveInstrument => "move-instrument",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "relocate-inter" => MoveKind::RelocateInter,
            "swap-inter" => MoveKind::SwapInter,
            "relocate-intra" => MoveKind::RelocateIntra,
            "swap-intra" => MoveKind::SwapIntra,
            "move-instrument" => MoveKind::MoveInstrument,
            _ => return None,
        })
    }
}

/// A concrete edit. Slots are 0-based indices into the route *after* the
/// edit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Move {
    /// Take `job` off `from` and insert it at `slot` of `to`; the listed
    /// instruments travel with it.
    RelocateInter {
        job: JobIx,
        from: OperatorIx,
        to: OperatorIx,
        slot: usize,
        instruments: Vec<InstrumentIx>,
    },
    /// Exchange two jobs of different operators, each taking the other's
    /// position. `instruments` go with `job`, `other_instruments` with
    /// `other_job`.
    SwapInter {
        job: JobIx,
        operator: OperatorIx,
        other_job: JobIx,
        other_operator: OperatorIx,
        instruments: Vec<InstrumentIx>,
        other_instruments: Vec<InstrumentIx>,
    },
    RelocateIntra {
        operator: OperatorIx,
        job: JobIx,
        slot: usize,
    },
    SwapIntra {
        operator: OperatorIx,
        job: JobIx,
        other_job: JobIx,
    },
    /// `from = None` allocates a previously unallocated instrument.
    MoveInstrument {
        instrument: InstrumentIx,
        from: Option<OperatorIx>,
        to: OperatorIx,
    },
}

impl Move {
    pub fn kind(&self) -> MoveKind {
        match self {
            Move::RelocateInter { .. } => MoveKind::RelocateInter,
            Move::SwapInter { .. } => MoveKind::SwapInter,
            Move::RelocateIntra { .. } => MoveKind::RelocateIntra,
            Move::SwapIntra { .. } => MoveKind::SwapIntra,
            Move::MoveInstrument { .. } => MoveKind::MoveInstrument,
        }
    }
}

/// A move together with the improvement it is predicted to bring.
#[derive(Debug, Clone, PartialEq)]
pub struct MoveSuggestion {
    pub action: Move,
    pub predicted_delta: f64,
}

fn stale(msg: String) -> Error {
    Error::Conflict(msg)
}

fn route_mut(s: &mut Schedule, op: OperatorIx) -> Result<&mut Vec<JobIx>> {
    s.routes
        .get_mut(op.0)
        .ok_or_else(|| Error::Input(format!("unknown operator #{}", op.0)))
}

fn take_job(s: &mut Schedule, op: OperatorIx, job: JobIx) -> Result<usize> {
    let route = route_mut(s, op)?;
    let pos = route
        .iter()
        .position(|&j| j == job)
        .ok_or_else(|| stale(format!("job #{} is no longer on operator #{}", job.0, op.0)))?;
    route.remove(pos);
    Ok(pos)
}

fn transfer(s: &mut Schedule, insts: &[InstrumentIx], from: OperatorIx, to: OperatorIx) -> Result<()> {
    if to.0 >= s.instruments.len() || from.0 >= s.instruments.len() {
        return Err(Error::Input("schedule is missing instrument sets".into()));
    }
    for t in insts {
        if !s.instruments[from.0].remove(t) {
            return Err(stale(format!(
                "instrument #{} is no longer held by operator #{}",
                t.0, from.0
            )));
        }
        s.instruments[to.0].insert(*t);
    }
    Ok(())
}

/// Applies `mv` to a copy of `sched`.
///
/// Fails with [`Error::Conflict`] when the move refers to a state the
/// schedule is no longer in.
pub fn apply_move(sched: &Schedule, mv: &Move) -> Result<Schedule> {
    let mut s = sched.clone();
    match mv {
        Move::RelocateInter {
            job,
            from,
            to,
            slot,
            instruments,
        } => {
            if from == to {
                return Err(Error::Input("relocation between the same operator".into()));
            }
            take_job(&mut s, *from, *job)?;
            let target = route_mut(&mut s, *to)?;
            if *slot > target.len() {
                return Err(stale(format!("slot {slot} is past the end of the target route")));
            }
            target.insert(*slot, *job);
            transfer(&mut s, instruments, *from, *to)?;
        }
        Move::SwapInter {
            job,
            operator,
            other_job,
            other_operator,
            instruments,
            other_instruments,
        } => {
            if operator == other_operator {
                return Err(Error::Input("inter-route swap within one route".into()));
            }
            let p = s
                .position(*operator, *job)
                .ok_or_else(|| stale(format!("job #{} is no longer on operator #{}", job.0, operator.0)))?;
            let q = s.position(*other_operator, *other_job).ok_or_else(|| {
                stale(format!(
                    "job #{} is no longer on operator #{}",
                    other_job.0, other_operator.0
                ))
            })?;
            s.routes[operator.0][p] = *other_job;
            s.routes[other_operator.0][q] = *job;
            transfer(&mut s, instruments, *operator, *other_operator)?;
            transfer(&mut s, other_instruments, *other_operator, *operator)?;
        }
        Move::RelocateIntra { operator, job, slot } => {
            take_job(&mut s, *operator, *job)?;
            let route = route_mut(&mut s, *operator)?;
            if *slot > route.len() {
                return Err(stale(format!("slot {slot} is past the end of the route")));
            }
            route.insert(*slot, *job);
        }
        Move::SwapIntra {
            operator,
            job,
            other_job,
        } => {
            let p = s.position(*operator, *job);
            let q = s.position(*operator, *other_job);
            let (Some(p), Some(q)) = (p, q) else {
                return Err(stale(format!(
                    "jobs #{} and #{} are no longer both on operator #{}",
                    job.0, other_job.0, operator.0
                )));
            };
            s.routes[operator.0].swap(p, q);
        }
        Move::MoveInstrument { instrument, from, to } => {
            match from {
                Some(from) => transfer(&mut s, &[*instrument], *from, *to)?,
                None => {
                    if s.instruments.iter().any(|set| set.contains(instrument)) {
                        return Err(stale(format!("instrument #{} is already allocated", instrument.0)));
                    }
                    s.instruments
                        .get_mut(to.0)
                        .ok_or_else(|| Error::Input(format!("unknown operator #{}", to.0)))?
                        .insert(*instrument);
                }
            }
        }
    }
    Ok(s)
}
