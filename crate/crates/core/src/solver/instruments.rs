//! Instrument allocation repair.

use crate::error::{Blocker, Error, Result};
use crate::model::{InstrumentIx, JobIx, OperatorIx, ProblemInstance, Qualifications, Schedule};
use crate::moves::{apply_move, Move};

#[derive(Debug, Clone, PartialEq)]
pub struct InstrumentRepair {
    pub schedule: Schedule,
    /// Applied instrument moves, in order.
    pub moves: Vec<Move>,
    /// Jobs on different operators that need the same instrument; these
    /// jobs have to be brought together before the instrument can follow.
    pub conflicts: Vec<(JobIx, JobIx, InstrumentIx)>,
}

/// Gives each instrument a single holder: the operator serving the jobs
/// that need it, when that operator is qualified, and otherwise (for
/// instruments no assigned job needs) a qualified current holder or the
/// first qualified operator.
pub fn repair_instruments(inst: &ProblemInstance, sched: &Schedule) -> Result<InstrumentRepair> {
    sched.ensure_well_formed(inst)?;
    let q = Qualifications::new(inst);

    let unplaceable: Vec<Blocker> = inst
        .instrument_ixs()
        .filter(|t| inst.operator_ixs().all(|i| !q.holds_ok[i.0][t.0]))
        .map(|t| Blocker::Instrument {
            job: q.instrument_jobs[t.0].first().copied(),
            instrument: t,
        })
        .collect();
    if !unplaceable.is_empty() {
        return Err(Error::Infeasible(unplaceable));
    }

    let assignment = sched.assignment(inst.num_jobs());
    let mut s = sched.clone();
    let mut moves = Vec::new();
    let mut conflicts = Vec::new();
    for t in inst.instrument_ixs() {
        let users: Vec<(JobIx, OperatorIx)> = q.instrument_jobs[t.0]
            .iter()
            .filter_map(|&j| assignment[j.0].map(|o| (j, o)))
            .collect();
        if let Some(&(first, o)) = users.first() {
            if let Some(&(other, _)) = users.iter().find(|u| u.1 != o) {
                conflicts.push((first, other, t));
                continue;
            }
        }
        let holders: Vec<OperatorIx> = inst
            .operator_ixs()
            .filter(|i| s.instruments[i.0].contains(&t))
            .collect();
        let target = match users.first() {
            Some(&(_, o)) if q.holds_ok[o.0][t.0] => o,
            Some(_) => continue,
            None => holders
                .iter()
                .copied()
                .find(|h| q.holds_ok[h.0][t.0])
                .or_else(|| inst.operator_ixs().find(|i| q.holds_ok[i.0][t.0]))
                .expect("checked above"),
        };
        if holders.is_empty() {
            moves.push(Move::MoveInstrument {
                instrument: t,
                from: None,
                to: target,
            });
        }
        for h in holders.into_iter().filter(|&h| h != target) {
            moves.push(Move::MoveInstrument {
                instrument: t,
                from: Some(h),
                to: target,
            });
        }
    }
    for mv in &moves {
        s = apply_move(&s, mv)?;
    }
    Ok(InstrumentRepair {
        schedule: s,
        moves,
        conflicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::model::{InstrumentIx as T, JobIx as J, OperatorIx as O};

    fn example_schedule(alloc_rows: &[&[usize]]) -> Schedule {
        Schedule::from_routes(vec![vec![J(0), J(3)], vec![J(1), J(2)]]).with_instruments(alloc(alloc_rows))
    }

    #[test]
    fn separated_instrument_follows_its_job() {
        let inst = instrument_instance();
        let r = repair_instruments(&inst, &example_schedule(&[&[0, 1], &[2, 3]])).unwrap();
        assert_eq!(
            r.moves,
            vec![Move::MoveInstrument {
                instrument: T(2),
                from: Some(O(1)),
                to: O(0)
            }]
        );
        assert_eq!(r.schedule.instruments, alloc(&[&[0, 1, 2], &[3]]));
        assert!(r.conflicts.is_empty());
    }

    #[test]
    fn satisfied_allocation_is_kept() {
        let inst = instrument_instance();
        let s = example_schedule(&[&[0, 1, 2], &[3]]);
        let r = repair_instruments(&inst, &s).unwrap();
        assert!(r.moves.is_empty());
        assert_eq!(r.schedule, s);
    }

    #[test]
    fn skill_restricted_instrument_is_pinned() {
        let inst = instrument_instance();
        let r = repair_instruments(&inst, &example_schedule(&[&[0], &[1, 2, 3]])).unwrap();
        assert!(r.schedule.instruments[0].contains(&T(1)));
        assert!(!r.schedule.instruments[1].contains(&T(1)));
    }

    #[test]
    fn unallocated_and_duplicated_instruments() {
        let inst = instrument_instance();
        let r = repair_instruments(&inst, &example_schedule(&[&[1, 2, 3], &[3]])).unwrap();
        assert_eq!(r.schedule.instruments, alloc(&[&[0, 1, 2], &[3]]));
    }

    #[test]
    fn shared_instrument_conflict() {
        let mut inst = instrument_instance();
        inst.jobs[1].required_instruments = set(&["I2"]);
        let s = example_schedule(&[&[0, 1, 2], &[3]]);
        let r = repair_instruments(&inst, &s).unwrap();
        assert_eq!(r.conflicts, vec![(J(0), J(1), T(2))]);
    }

    #[test]
    fn nobody_may_hold() {
        let mut inst = instrument_instance();
        inst.operators[0].skills = set(&["Y"]);
        let err = repair_instruments(&inst, &example_schedule(&[&[0, 1], &[2, 3]])).unwrap_err();
        assert_eq!(
            err,
            Error::Infeasible(vec![Blocker::Instrument {
                job: Some(J(0)),
                instrument: T(1)
            }])
        );
    }
}
