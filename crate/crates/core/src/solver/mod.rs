//! Schedule construction: exhaustive search for small instances, greedy
//! construction plus exchange-driven local search for larger ones, and
//! instrument allocation repair.

mod exact;
mod instruments;
mod local;

use std::collections::BTreeSet;

pub use exact::{brute_force, brute_force_with, search_space_size, Solution, SEARCH_LIMIT};
pub use instruments::{repair_instruments, InstrumentRepair};
pub use local::{greedy_seed, local_search, SearchOptions, SearchOutcome, TraceStep};

use crate::error::{Blocker, Error, Result};
use crate::model::{instrument_groups, InstrumentIx, JobIx, OperatorIx, ProblemInstance, Qualifications};

/// Which operators may take which jobs, with instrument-sharing jobs kept
/// together.
pub(crate) struct Plan {
    pub quals: Qualifications,
    pub group_of: Vec<usize>,
    /// Groups ordered by their first job; jobs ascending within a group.
    pub groups: Vec<Vec<JobIx>>,
    /// Operators able to serve every job of the group and hold every
    /// instrument those jobs need.
    pub group_ops: Vec<Vec<OperatorIx>>,
    /// First operator qualified to hold each instrument.
    pub first_holder: Vec<Option<OperatorIx>>,
}

impl Plan {
    pub fn new(inst: &ProblemInstance) -> Result<Self> {
        let quals = Qualifications::new(inst);
        let (group_of, groups) = instrument_groups(inst, &quals);
        let group_ops: Vec<Vec<OperatorIx>> = groups
            .iter()
            .map(|g| {
                inst.operator_ixs()
                    .filter(|&i| g.iter().all(|&j| quals.can_serve(i, j)))
                    .collect()
            })
            .collect();
        let first_holder: Vec<Option<OperatorIx>> = inst
            .instrument_ixs()
            .map(|t| inst.operator_ixs().find(|i| quals.holds_ok[i.0][t.0]))
            .collect();
        let plan = Self {
            quals,
            group_of,
            groups,
            group_ops,
            first_holder,
        };
        let blockers = plan.blockers(inst);
        if blockers.is_empty() {
            Ok(plan)
        } else {
            Err(Error::Infeasible(blockers))
        }
    }

    fn blockers(&self, inst: &ProblemInstance) -> Vec<Blocker> {
        let q = &self.quals;
        let mut out = BTreeSet::new();
        for (g, jobs) in self.groups.iter().enumerate() {
            if !self.group_ops[g].is_empty() {
                continue;
            }
            let before = out.len();
            for &j in jobs {
                if inst.operator_ixs().all(|i| !q.job_ok[i.0][j.0]) {
                    // the skills the closest operator still lacks
                    let missing = inst
                        .operator_ixs()
                        .map(|i| inst.missing_job_skills(i, j))
                        .min_by_key(|m| m.len())
                        .unwrap_or_else(|| inst.jobs[j.0].required_skills.iter().cloned().collect());
                    for skill in missing {
                        out.insert(Blocker::Skill { job: j, skill });
                    }
                }
                for &t in &q.job_instruments[j.0] {
                    if !inst.operator_ixs().any(|i| q.job_ok[i.0][j.0] && q.holds_ok[i.0][t.0]) {
                        out.insert(Blocker::Instrument {
                            job: Some(j),
                            instrument: t,
                        });
                    }
                }
            }
            if out.len() == before {
                // each job is servable alone but the group is not
                for &j in jobs {
                    for &t in &q.job_instruments[j.0] {
                        out.insert(Blocker::Instrument {
                            job: Some(j),
                            instrument: t,
                        });
                    }
                }
            }
        }
        for t in inst.instrument_ixs() {
            if self.first_holder[t.0].is_none() && q.instrument_jobs[t.0].is_empty() {
                out.insert(Blocker::Instrument {
                    job: None,
                    instrument: t,
                });
            }
        }
        out.into_iter().collect()
    }

    /// Instrument sets for a job-to-operator assignment: required
    /// instruments go with their jobs, the rest to their first qualified
    /// operator.
    pub fn allocate(&self, inst: &ProblemInstance, op_of: impl Fn(JobIx) -> OperatorIx) -> Vec<BTreeSet<InstrumentIx>> {
        let mut alloc = vec![BTreeSet::new(); inst.num_operators()];
        for t in inst.instrument_ixs() {
            let holder = match self.quals.instrument_jobs[t.0].first() {
                Some(&j) => op_of(j),
                None => self.first_holder[t.0].expect("checked when the plan was built"),
            };
            alloc[holder.0].insert(t);
        }
        alloc
    }
}

/// Ok when some schedule satisfies every skill and instrument constraint;
/// otherwise the blocking pairs.
pub fn check_feasible(inst: &ProblemInstance) -> Result<()> {
    Plan::new(inst).map(|_| ())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;

    #[test]
    fn missing_skill_blocks() {
        let mut inst = skills_instance();
        inst.skills.insert("D".into());
        inst.jobs[0].required_skills = set(&["D"]);
        let err = check_feasible(&inst).unwrap_err();
        assert_eq!(
            err,
            Error::Infeasible(vec![Blocker::Skill {
                job: JobIx(0),
                skill: "D".into()
            }])
        );
    }

    #[test]
    fn unqualified_instrument_blocks() {
        let mut inst = instrument_instance();
        inst.operators[0].skills = set(&["Z"]);
        let err = check_feasible(&inst).unwrap_err();
        assert_eq!(
            err,
            Error::Infeasible(vec![Blocker::Instrument {
                job: Some(JobIx(0)),
                instrument: InstrumentIx(1)
            }])
        );
    }

    #[test]
    fn groups_and_allocation() {
        let inst = instrument_instance();
        let plan = Plan::new(&inst).unwrap();
        assert_eq!(plan.group_ops[plan.group_of[0]], vec![OperatorIx(0)]);
        assert_eq!(plan.group_ops[plan.group_of[2]], vec![OperatorIx(0), OperatorIx(1)]);
        let alloc = plan.allocate(&inst, |j| if j.0 == 2 { OperatorIx(1) } else { OperatorIx(0) });
        assert_eq!(alloc, alloc_rows());
    }

    fn alloc_rows() -> Vec<BTreeSet<InstrumentIx>> {
        alloc(&[&[0, 1, 2], &[3]])
    }
}
