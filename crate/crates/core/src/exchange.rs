//! Exchange-property checks.
//!
//! Inter-operator properties look at critical operators only: can one of
//! their jobs be moved to another operator (single exchange) or swapped with
//! another operator's job (pairwise exchange) so that the makespan drops?
//! Intra-route properties ask whether relocating or swapping jobs within a
//! route shortens its travel distance.
//!
//! Route boundaries use the depot as a virtual neighbour. Inter-operator
//! moves carry the moved job's instruments along when no other job of the
//! old operator needs them, and a move only counts when it introduces no
//! new skill or instrument violation.

use crate::cost::{sequence_cost, sequence_distance};
use crate::error::{Error, Result};
use crate::model::{distance, InstrumentIx, JobIx, OperatorIx, Point, ProblemInstance, Qualifications, Schedule};
use crate::moves::{apply_move, Move};
use crate::tolerance::{self, eps};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExchangeKind {
    /// Extended single exchange: relocate a critical operator's job.
    SepPlus,
    /// Extended pairwise exchange: swap a critical operator's job with
    /// another operator's job.
    PepPlus,
    /// Individual single exchange: relocate a job within its route.
    Isep,
    /// Individual pairwise exchange: swap two jobs of one route.
    Ipep,
}

impl ExchangeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExchangeKind::SepPlus => "SEP+",
            ExchangeKind::PepPlus => "PEP+",
            ExchangeKind::Isep => "ISEP",
            ExchangeKind::Ipep => "IPEP",
        }
    }
}

/// A violated exchange inequality and the move that exploits it.
///
/// `lhs > rhs + eps` for every reported violation. `delta` is the exact
/// improvement obtained by applying `repair`: the drop in makespan for the
/// inter-operator kinds, the drop in route distance for the intra-route
/// kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeViolation {
    pub kind: ExchangeKind,
    pub operator: OperatorIx,
    pub job: JobIx,
    /// 0-based position of `job` in its route.
    pub position: usize,
    pub target_operator: OperatorIx,
    /// The swap partner (pairwise kinds).
    pub target_job: Option<JobIx>,
    /// Destination slot (single kinds) or position of the partner
    /// (pairwise kinds).
    pub target_position: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub delta: f64,
    pub repair: Move,
}

pub(crate) struct Snapshot<'a> {
    pub inst: &'a ProblemInstance,
    pub sched: &'a Schedule,
    pub quals: Qualifications,
    pub costs: Vec<f64>,
    pub cmax: f64,
    pub critical: Vec<OperatorIx>,
    pub assignment: Vec<Option<OperatorIx>>,
}

impl<'a> Snapshot<'a> {
    pub fn new(inst: &'a ProblemInstance, sched: &'a Schedule) -> Result<Self> {
        sched.ensure_well_formed(inst)?;
        if !sched.is_feasible(inst.num_jobs()) {
            return Err(Error::Input(
                "schedule is not feasible (every job must be on exactly one route); \
                 see the feasibility explanations"
                    .into(),
            ));
        }
        let costs: Vec<f64> = inst
            .operator_ixs()
            .map(|i| sequence_cost(inst, i, sched.route(i)))
            .collect();
        let cmax = costs.iter().copied().fold(0.0, f64::max);
        let critical = inst
            .operator_ixs()
            .filter(|i| tolerance::approx_eq(costs[i.0], cmax))
            .collect();
        Ok(Self {
            inst,
            sched,
            quals: Qualifications::new(inst),
            costs,
            cmax,
            critical,
            assignment: sched.assignment(inst.num_jobs()),
        })
    }

    fn loc(&self, j: Option<JobIx>) -> Point {
        j.map_or(self.inst.depot, |j| self.inst.location(j))
    }

    fn d(&self, a: Option<JobIx>, b: Option<JobIx>) -> f64 {
        distance(self.loc(a), self.loc(b))
    }

    fn neighbours(route: &[JobIx], pos: usize) -> (Option<JobIx>, Option<JobIx>) {
        let pred = pos.checked_sub(1).map(|p| route[p]);
        (pred, route.get(pos + 1).copied())
    }

    /// Neighbours of insertion slot `slot` of `route`.
    fn slot_neighbours(route: &[JobIx], slot: usize) -> (Option<JobIx>, Option<JobIx>) {
        let pred = slot.checked_sub(1).map(|p| route[p]);
        (pred, route.get(slot).copied())
    }

    /// Instruments that leave `op` together with `job`.
    fn carried(&self, op: OperatorIx, job: JobIx) -> Vec<InstrumentIx> {
        let held = &self.sched.instruments[op.0];
        self.quals.job_instruments[job.0]
            .iter()
            .copied()
            .filter(|t| held.contains(t))
            .filter(|t| {
                self.sched
                    .route(op)
                    .iter()
                    .all(|&other| other == job || !self.quals.job_instruments[other.0].contains(t))
            })
            .collect()
    }

    /// Makespan after replacing the routes of the listed operators.
    fn cmax_with(&self, after: &Schedule, changed: &[OperatorIx]) -> f64 {
        self.inst
            .operator_ixs()
            .map(|i| {
                if changed.contains(&i) {
                    sequence_cost(self.inst, i, after.route(i))
                } else {
                    self.costs[i.0]
                }
            })
            .fold(0.0, f64::max)
    }

    /// The move introduces no skill or instrument violation that was not
    /// already present.
    fn admissible(
        &self,
        after: &Schedule,
        jobs: &[(JobIx, OperatorIx, OperatorIx)],
        insts: &[(InstrumentIx, OperatorIx, OperatorIx)],
    ) -> bool {
        let q = &self.quals;
        for &(j, from, to) in jobs {
            if !q.job_ok[to.0][j.0] && q.job_ok[from.0][j.0] {
                return false;
            }
        }
        for &(t, from, to) in insts {
            if !q.holds_ok[to.0][t.0] && q.holds_ok[from.0][t.0] {
                return false;
            }
        }
        let op_after = |j: JobIx| {
            jobs.iter()
                .find(|m| m.0 == j)
                .map(|m| Some(m.2))
                .unwrap_or(self.assignment[j.0])
        };
        let affected = jobs
            .iter()
            .map(|m| m.0)
            .chain(insts.iter().flat_map(|&(t, _, _)| q.instrument_jobs[t.0].iter().copied()));
        for j in affected {
            for &t in &q.job_instruments[j.0] {
                let met_before = self.assignment[j.0].is_some_and(|o| self.sched.instruments[o.0].contains(&t));
                let met_after = op_after(j).is_some_and(|o| after.instruments[o.0].contains(&t));
                if met_before && !met_after {
                    return false;
                }
            }
        }
        true
    }

    pub fn sep_plus(&self) -> Vec<ExchangeViolation> {
        let inst = self.inst;
        let (alpha, beta) = (inst.alpha, inst.beta);
        let mut out = Vec::new();
        for &i in &self.critical {
            for (k, &j) in self.sched.route(i).iter().enumerate() {
                let carried = self.carried(i, j);
                for i2 in inst.operator_ixs().filter(|&o| o != i) {
                    let target = self.sched.route(i2);
                    for slot in 0..=target.len() {
                        let (pred, succ) = Self::slot_neighbours(target, slot);
                        let lhs = self.costs[i.0] - self.costs[i2.0];
                        let rhs = alpha * inst.processing_time(i2, j)
                            + beta * (self.d(pred, Some(j)) + self.d(Some(j), succ) - self.d(pred, succ));
                        if !tolerance::gt(lhs, rhs) {
                            continue;
                        }
                        let repair = Move::RelocateInter {
                            job: j,
                            from: i,
                            to: i2,
                            slot,
                            instruments: carried.clone(),
                        };
                        let Ok(after) = apply_move(self.sched, &repair) else {
                            continue;
                        };
                        let moved_insts: Vec<_> = carried.iter().map(|&t| (t, i, i2)).collect();
                        if !self.admissible(&after, &[(j, i, i2)], &moved_insts) {
                            continue;
                        }
                        let delta = self.cmax - self.cmax_with(&after, &[i, i2]);
                        if delta > eps() {
                            out.push(ExchangeViolation {
                                kind: ExchangeKind::SepPlus,
                                operator: i,
                                job: j,
                                position: k,
                                target_operator: i2,
                                target_job: None,
                                target_position: slot,
                                lhs,
                                rhs,
                                delta,
                                repair,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn pep_plus(&self) -> Vec<ExchangeViolation> {
        let inst = self.inst;
        let (alpha, beta) = (inst.alpha, inst.beta);
        let mut out = Vec::new();
        for &i in &self.critical {
            let route = self.sched.route(i);
            for (k, &j) in route.iter().enumerate() {
                let (jm, jp) = Self::neighbours(route, k);
                let carried = self.carried(i, j);
                for i2 in inst.operator_ixs().filter(|&o| o != i) {
                    let other = self.sched.route(i2);
                    for (k2, &j2) in other.iter().enumerate() {
                        let (j2m, j2p) = Self::neighbours(other, k2);
                        // swapping j2 into j's slot must lower i's cost
                        let premise_l = beta
                            * ((self.d(jm, Some(j)) + self.d(Some(j), jp))
                                - (self.d(jm, Some(j2)) + self.d(Some(j2), jp)));
                        let premise_r = alpha * (inst.processing_time(i, j2) - inst.processing_time(i, j));
                        if !tolerance::gt(premise_l, premise_r) {
                            continue;
                        }
                        let lhs = self.costs[i.0] - self.costs[i2.0];
                        let rhs = alpha * (inst.processing_time(i2, j) - inst.processing_time(i2, j2))
                            + beta
                                * (self.d(j2m, Some(j)) + self.d(Some(j), j2p)
                                    - self.d(j2m, Some(j2))
                                    - self.d(Some(j2), j2p));
                        if !tolerance::gt(lhs, rhs) {
                            continue;
                        }
                        let carried2 = self.carried(i2, j2);
                        let repair = Move::SwapInter {
                            job: j,
                            operator: i,
                            other_job: j2,
                            other_operator: i2,
                            instruments: carried.clone(),
                            other_instruments: carried2.clone(),
                        };
                        let Ok(after) = apply_move(self.sched, &repair) else {
                            continue;
                        };
                        let moved_insts: Vec<_> = carried
                            .iter()
                            .map(|&t| (t, i, i2))
                            .chain(carried2.iter().map(|&t| (t, i2, i)))
                            .collect();
                        if !self.admissible(&after, &[(j, i, i2), (j2, i2, i)], &moved_insts) {
                            continue;
                        }
                        let delta = self.cmax - self.cmax_with(&after, &[i, i2]);
                        if delta > eps() {
                            out.push(ExchangeViolation {
                                kind: ExchangeKind::PepPlus,
                                operator: i,
                                job: j,
                                position: k,
                                target_operator: i2,
                                target_job: Some(j2),
                                target_position: k2,
                                lhs,
                                rhs,
                                delta,
                                repair,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn isep(&self) -> Vec<ExchangeViolation> {
        let mut out = Vec::new();
        for i in self.inst.operator_ixs() {
            let route = self.sched.route(i);
            if route.len() < 2 {
                continue;
            }
            let current = sequence_distance(self.inst, route);
            for (k, &j) in route.iter().enumerate() {
                let (jm, jp) = Self::neighbours(route, k);
                let removal = self.d(jm, Some(j)) + self.d(Some(j), jp) - self.d(jm, jp);
                let mut reduced = route.to_vec();
                reduced.remove(k);
                for slot in 0..=reduced.len() {
                    if slot == k {
                        continue;
                    }
                    let (a, b) = Self::slot_neighbours(&reduced, slot);
                    let insertion = self.d(a, Some(j)) + self.d(Some(j), b) - self.d(a, b);
                    let mut candidate = reduced.clone();
                    candidate.insert(slot, j);
                    let delta = current - sequence_distance(self.inst, &candidate);
                    if delta > eps() && tolerance::gt(removal, insertion) {
                        out.push(ExchangeViolation {
                            kind: ExchangeKind::Isep,
                            operator: i,
                            job: j,
                            position: k,
                            target_operator: i,
                            target_job: None,
                            target_position: slot,
                            lhs: removal,
                            rhs: insertion,
                            delta,
                            repair: Move::RelocateIntra {
                                operator: i,
                                job: j,
                                slot,
                            },
                        });
                    }
                }
            }
        }
        out
    }

    pub fn ipep(&self) -> Vec<ExchangeViolation> {
        let mut out = Vec::new();
        for i in self.inst.operator_ixs() {
            let route = self.sched.route(i);
            let current = sequence_distance(self.inst, route);
            for k in 0..route.len() {
                for k2 in k + 1..route.len() {
                    let mut candidate = route.to_vec();
                    candidate.swap(k, k2);
                    let swapped = sequence_distance(self.inst, &candidate);
                    let delta = current - swapped;
                    if delta > eps() && tolerance::gt(current, swapped) {
                        out.push(ExchangeViolation {
                            kind: ExchangeKind::Ipep,
                            operator: i,
                            job: route[k],
                            position: k,
                            target_operator: i,
                            target_job: Some(route[k2]),
                            target_position: k2,
                            lhs: current,
                            rhs: swapped,
                            delta,
                            repair: Move::SwapIntra {
                                operator: i,
                                job: route[k],
                                other_job: route[k2],
                            },
                        });
                    }
                }
            }
        }
        out
    }
}

/// Relocations of a critical operator's job to another operator that
/// lower the makespan.
pub fn sep_plus_violations(inst: &ProblemInstance, sched: &Schedule) -> Result<Vec<ExchangeViolation>> {
    Ok(Snapshot::new(inst, sched)?.sep_plus())
}

/// Swaps between a critical operator's job and another operator's job that
/// lower the critical operator's cost and the makespan.
pub fn pep_plus_violations(inst: &ProblemInstance, sched: &Schedule) -> Result<Vec<ExchangeViolation>> {
    Ok(Snapshot::new(inst, sched)?.pep_plus())
}

/// Relocations within a route that shorten it.
pub fn isep_violations(inst: &ProblemInstance, sched: &Schedule) -> Result<Vec<ExchangeViolation>> {
    Ok(Snapshot::new(inst, sched)?.isep())
}

/// Swaps within a route that shorten it.
pub fn ipep_violations(inst: &ProblemInstance, sched: &Schedule) -> Result<Vec<ExchangeViolation>> {
    Ok(Snapshot::new(inst, sched)?.ipep())
}

/// All four kinds, in kind order.
pub fn all_violations(inst: &ProblemInstance, sched: &Schedule) -> Result<Vec<ExchangeViolation>> {
    let snap = Snapshot::new(inst, sched)?;
    let mut out = snap.sep_plus();
    out.extend(snap.pep_plus());
    out.extend(snap.isep());
    out.extend(snap.ipep());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{cost_report, route_distance};
    use crate::model::fixtures::*;

    fn jobs(ix: &[usize]) -> Vec<JobIx> {
        ix.iter().map(|&j| JobIx(j)).collect()
    }

    #[test]
    fn third_job_relocation_violates_single_exchange() {
        let inst = two_operator_three_jobs();
        let s = two_operator_schedule();
        let v = sep_plus_violations(&inst, &s).unwrap();
        assert!(!v.is_empty());
        assert!(v.iter().all(|x| x.job == JobIx(2) && x.target_operator == OperatorIx(1)));
        let front = v.iter().find(|x| x.target_position == 0).unwrap();
        assert!((front.lhs - (88.1231056256 - 43.0)).abs() < 1e-6);
        assert!((front.rhs - 30.0).abs() < 1e-12);
        assert!((front.delta - (0.5 * 150.0 + 0.5 * (18.0 + 68f64.sqrt()) - 73.0)).abs() < 1e-9);
        // the first job cannot move: 60.12 >= 45.12
        assert!(v.iter().all(|x| x.job != JobIx(0)));
    }

    #[test]
    fn swapping_first_two_jobs_violates_pairwise_exchange() {
        let inst = two_operator_three_jobs();
        let s = two_operator_schedule();
        let v = pep_plus_violations(&inst, &s).unwrap();
        assert_eq!(v.len(), 1);
        let x = &v[0];
        assert_eq!((x.operator, x.job), (OperatorIx(0), JobIx(0)));
        assert_eq!((x.target_operator, x.target_job), (OperatorIx(1), Some(JobIx(1))));
        assert!((x.rhs - 22.0).abs() < 1e-12);
        let after = apply_move(&s, &x.repair).unwrap();
        assert!((cost_report(&inst, &after).unwrap().makespan - 65.0).abs() < 1e-12);
        assert!((x.delta - (88.1231056256 - 65.0)).abs() < 1e-6);
    }

    #[test]
    fn single_operator_has_no_inter_violations() {
        let mut inst = two_operator_three_jobs();
        inst.operators.truncate(1);
        inst.processing.truncate(1);
        let s = Schedule::from_routes(vec![jobs(&[0, 1, 2])]);
        assert!(sep_plus_violations(&inst, &s).unwrap().is_empty());
        assert!(pep_plus_violations(&inst, &s).unwrap().is_empty());
    }

    #[test]
    fn identical_jobs_swap_changes_nothing() {
        let mut inst = two_operator_three_jobs();
        inst.processing = vec![vec![50.0, 10.0, 10.0], vec![50.0, 10.0, 10.0]];
        // J2 and J3 share a location and a processing column
        let s = Schedule::from_routes(vec![jobs(&[0, 2]), jobs(&[1])]);
        let v = pep_plus_violations(&inst, &s).unwrap();
        assert!(v.iter().all(|x| !(x.job == JobIx(2) && x.target_job == Some(JobIx(1)))));
    }

    #[test]
    fn intra_route_checks() {
        let inst = two_operator_three_jobs();
        // route [J2, J1, J3] with J1 at (3,4) and J2, J3 at (5,12)
        let s = Schedule::from_routes(vec![jobs(&[1, 0, 2]), vec![]]);
        let isep = isep_violations(&inst, &s).unwrap();
        let front = isep
            .iter()
            .find(|x| x.job == JobIx(0) && x.target_position == 0)
            .expect("moving J1 to the front shortens the route");
        let before = route_distance(&inst, &s, OperatorIx(0)).unwrap();
        let after = apply_move(&s, &front.repair).unwrap();
        let shorter = route_distance(&inst, &after, OperatorIx(0)).unwrap();
        assert!((before - shorter - front.delta).abs() < 1e-9);
        assert!((front.lhs - front.rhs - front.delta).abs() < 1e-9);

        let ipep = ipep_violations(&inst, &s).unwrap();
        let pairs: Vec<_> = ipep.iter().map(|x| (x.job, x.target_job.unwrap())).collect();
        assert!(pairs.contains(&(JobIx(1), JobIx(0))));
        assert!(pairs.contains(&(JobIx(0), JobIx(2))));
        assert!(!pairs.contains(&(JobIx(1), JobIx(2))));
    }

    #[test]
    fn single_job_route_is_individually_efficient() {
        let inst = two_operator_three_jobs();
        let s = Schedule::from_routes(vec![jobs(&[0]), jobs(&[1, 2])]);
        assert!(isep_violations(&inst, &s).unwrap().iter().all(|x| x.operator != OperatorIx(0)));
    }

    #[test]
    fn infeasible_schedule_is_rejected() {
        let inst = two_operator_three_jobs();
        let s = Schedule::from_routes(vec![jobs(&[0]), jobs(&[1])]);
        assert!(matches!(sep_plus_violations(&inst, &s), Err(Error::Input(_))));
        assert!(matches!(ipep_violations(&inst, &s), Err(Error::Input(_))));
    }

    #[test]
    fn relocation_to_unqualified_operator_is_not_a_violation() {
        let mut inst = two_operator_three_jobs();
        inst.skills = set(&["S"]);
        inst.jobs[2].required_skills = set(&["S"]);
        inst.operators[0].skills = set(&["S"]);
        let s = two_operator_schedule();
        assert!(sep_plus_violations(&inst, &s).unwrap().is_empty());
    }

    #[test]
    fn relocation_carries_instruments() {
        let mut inst = two_operator_three_jobs();
        inst.instruments = vec![crate::model::InstrumentSpec {
            id: "T".into(),
            required_skills: Default::default(),
        }];
        inst.jobs[2].required_instruments = set(&["T"]);
        let s = two_operator_schedule().with_instruments(alloc(&[&[0], &[]]));
        let v = sep_plus_violations(&inst, &s).unwrap();
        assert!(!v.is_empty());
        for x in &v {
            let Move::RelocateInter { instruments, .. } = &x.repair else {
                panic!("expected relocation")
            };
            assert_eq!(instruments, &vec![InstrumentIx(0)]);
        }
    }
}
