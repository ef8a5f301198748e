//! Greedy construction and exchange-driven local search.

use super::{repair_instruments, Plan};
use crate::cost::{objective, sequence_cost, sequence_distance};
use crate::error::{Error, Result};
use crate::exchange::Snapshot;
use crate::exec::{self, Budget, Execution};
use crate::model::{JobIx, OperatorIx, ProblemInstance, Schedule};
use crate::moves::{apply_move, Move};
use crate::tolerance::{self, eps};

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub execution: Execution,
    pub budget: Budget,
    /// Safety guard on the number of improvement moves.
    pub max_moves: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            execution: Execution::default(),
            budget: Budget::unlimited(),
            max_moves: 10_000,
        }
    }
}

/// One applied move and the objective right after it.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub action: Move,
    pub makespan: f64,
    pub total_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub schedule: Schedule,
    pub trace: Vec<TraceStep>,
    /// False when the budget ran out (or the move guard was hit) before a
    /// fixpoint was reached; `schedule` is then the last state reached.
    pub completed: bool,
}

/// Cheapest insertion slot for `job` in `route`: smallest added distance,
/// earliest slot on ties.
fn cheapest_slot(inst: &ProblemInstance, route: &[JobIx], job: JobIx) -> (usize, f64) {
    let base = sequence_distance(inst, route);
    let mut best = (0, f64::INFINITY);
    let mut candidate = route.to_vec();
    for slot in 0..=route.len() {
        candidate.insert(slot, job);
        let added = sequence_distance(inst, &candidate) - base;
        candidate.remove(slot);
        if added < best.1 - eps() {
            best = (slot, added);
        }
    }
    best
}

/// Inserts `jobs` one by one into `route` at their cheapest slots.
fn insert_all(inst: &ProblemInstance, route: &[JobIx], jobs: &[JobIx]) -> (Vec<JobIx>, Vec<usize>) {
    let mut r = route.to_vec();
    let mut slots = Vec::with_capacity(jobs.len());
    for &j in jobs {
        let (slot, _) = cheapest_slot(inst, &r, j);
        r.insert(slot, j);
        slots.push(slot);
    }
    (r, slots)
}

/// Picks the operator whose extended route gives the smallest makespan,
/// then the smallest cost increase, then the lowest index.
///
/// `setup(o)` gives the operator costs, the route of `o` and the jobs to
/// insert into it.
fn pick_operator(
    inst: &ProblemInstance,
    candidates: &[OperatorIx],
    setup: impl Fn(OperatorIx) -> (Vec<f64>, Vec<JobIx>, Vec<JobIx>),
) -> (OperatorIx, Vec<JobIx>, Vec<usize>) {
    type Pick = (f64, f64, OperatorIx, Vec<JobIx>, Vec<usize>);
    let mut best: Option<Pick> = None;
    for &o in candidates {
        let (costs, base, jobs) = setup(o);
        let (route, slots) = insert_all(inst, &base, &jobs);
        let cost = sequence_cost(inst, o, &route);
        let cmax = costs
            .iter()
            .enumerate()
            .map(|(i, &c)| if i == o.0 { cost } else { c })
            .fold(0.0, f64::max);
        let added = cost - costs[o.0];
        let better = match &best {
            None => true,
            Some((bc, ba, ..)) => {
                cmax < bc - eps() || (tolerance::approx_eq(cmax, *bc) && added < ba - eps())
            }
        };
        if better {
            best = Some((cmax, added, o, route, slots));
        }
    }
    let (_, _, o, route, slots) = best.expect("every group has a qualified operator");
    (o, route, slots)
}

fn route_costs(inst: &ProblemInstance, routes: &[Vec<JobIx>]) -> Vec<f64> {
    routes
        .iter()
        .enumerate()
        .map(|(i, r)| sequence_cost(inst, OperatorIx(i), r))
        .collect()
}

/// Cheapest-insertion construction: jobs in input order (instrument-sharing
/// jobs together), each placed where the resulting makespan is smallest.
/// Instruments go with the jobs that need them.
pub fn greedy_seed(inst: &ProblemInstance) -> Result<Schedule> {
    let plan = Plan::new(inst)?;
    greedy_with(inst, &plan)
}

fn greedy_with(inst: &ProblemInstance, plan: &Plan) -> Result<Schedule> {
    let mut routes: Vec<Vec<JobIx>> = vec![Vec::new(); inst.num_operators()];
    let mut costs = vec![0.0; inst.num_operators()];
    let mut op_of = vec![OperatorIx(0); inst.num_jobs()];
    for (g, jobs) in plan.groups.iter().enumerate() {
        let (o, route, _) = pick_operator(inst, &plan.group_ops[g], |o| {
            (costs.clone(), routes[o.0].clone(), jobs.clone())
        });
        costs[o.0] = sequence_cost(inst, o, &route);
        routes[o.0] = route;
        for &j in jobs {
            op_of[j.0] = o;
        }
    }
    let instruments = plan.allocate(inst, |j| op_of[j.0]);
    Ok(Schedule { routes, instruments })
}

struct Search<'a> {
    inst: &'a ProblemInstance,
    opts: &'a SearchOptions,
    schedule: Schedule,
    trace: Vec<TraceStep>,
}

impl Search<'_> {
    fn apply(&mut self, mv: Move) -> Result<()> {
        self.schedule = apply_move(&self.schedule, &mv)?;
        let (makespan, total_distance) = objective(self.inst, &self.schedule);
        self.trace.push(TraceStep {
            action: mv,
            makespan,
            total_distance,
        });
        Ok(())
    }

    /// Brings every instrument-sharing group onto one qualified operator.
    fn repair_groups(&mut self, plan: &Plan) -> Result<bool> {
        let inst = self.inst;
        for (g, jobs) in plan.groups.iter().enumerate() {
            if self.opts.budget.exhausted() {
                return Ok(false);
            }
            let assignment = self.schedule.assignment(inst.num_jobs());
            let here = |j: &JobIx| assignment[j.0].expect("seed covers every job");
            let first = here(&jobs[0]);
            if jobs.iter().all(|j| here(j) == first) && plan.group_ops[g].contains(&first) {
                continue;
            }
            let misplaced = |o: OperatorIx| jobs.iter().copied().filter(|j| here(j) != o).collect::<Vec<_>>();
            let (target, _, slots) = pick_operator(inst, &plan.group_ops[g], |o| {
                let moving = misplaced(o);
                let mut routes = self.schedule.routes.clone();
                for j in &moving {
                    routes[here(j).0].retain(|x| x != j);
                }
                (route_costs(inst, &routes), routes[o.0].clone(), moving)
            });
            for (j, slot) in misplaced(target).into_iter().zip(slots) {
                self.apply(Move::RelocateInter {
                    job: j,
                    from: here(&j),
                    to: target,
                    slot,
                    instruments: Vec::new(),
                })?;
            }
        }
        Ok(true)
    }

    /// Best improving exchange move, if any. `Err(Cancelled)` when the
    /// budget ran out during evaluation.
    fn best_move(&self) -> Result<Option<Move>> {
        let snap = Snapshot::new(self.inst, &self.schedule)?;
        let mut candidates = snap.sep_plus();
        candidates.extend(snap.pep_plus());
        candidates.extend(snap.isep());
        candidates.extend(snap.ipep());
        let (cmax, dist) = objective(self.inst, &self.schedule);
        let budget = &self.opts.budget;
        let gains = exec::map(self.opts.execution, &candidates, |v| {
            if budget.exhausted() {
                return None;
            }
            let after = apply_move(&self.schedule, &v.repair).ok()?;
            let (c, d) = objective(self.inst, &after);
            Some((cmax - c, dist - d))
        });
        if budget.exhausted() {
            return Err(Error::Cancelled);
        }
        let mut best: Option<(f64, f64, usize)> = None;
        for (k, gain) in gains.into_iter().enumerate() {
            let Some((gc, gd)) = gain else { continue };
            let improving = gc > eps() || (gc >= -eps() && gd > eps());
            if !improving {
                continue;
            }
            let better = match best {
                None => true,
                Some((bc, bd, _)) => gc > bc + eps() || (tolerance::approx_eq(gc, bc) && gd > bd + eps()),
            };
            if better {
                best = Some((gc, gd, k));
            }
        }
        Ok(best.map(|(_, _, k)| candidates.swap_remove(k).repair))
    }
}

/// Local search from `seed` (or the greedy construction).
///
/// First every constraint is repaired: instrument-sharing jobs are moved
/// onto one qualified operator and instruments are moved to the jobs that
/// need them. Then the best improving relocation or swap (largest makespan
/// gain, then largest distance gain, then earliest candidate) is applied
/// until no exchange property is violated. Every applied move is recorded
/// in the trace.
pub fn local_search(inst: &ProblemInstance, seed: Option<&Schedule>, opts: &SearchOptions) -> Result<SearchOutcome> {
    let plan = Plan::new(inst)?;
    let start = match seed {
        Some(s) => {
            s.ensure_well_formed(inst)?;
            if !s.is_feasible(inst.num_jobs()) {
                return Err(Error::Input("seed schedule must assign every job exactly once".into()));
            }
            s.clone()
        }
        None => greedy_with(inst, &plan)?,
    };
    let mut search = Search {
        inst,
        opts,
        schedule: start,
        trace: Vec::new(),
    };
    let done = |search: Search, completed| SearchOutcome {
        schedule: search.schedule,
        trace: search.trace,
        completed,
    };

    if !search.repair_groups(&plan)? {
        return Ok(done(search, false));
    }
    let repair = repair_instruments(inst, &search.schedule)?;
    debug_assert!(repair.conflicts.is_empty());
    for mv in repair.moves {
        search.apply(mv)?;
    }

    loop {
        if search.trace.len() >= opts.max_moves || opts.budget.exhausted() {
            return Ok(done(search, false));
        }
        match search.best_move() {
            Ok(Some(mv)) => search.apply(mv)?,
            Ok(None) => return Ok(done(search, true)),
            Err(Error::Cancelled) => return Ok(done(search, false)),
            Err(e) => return Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explain::{explain, Code};
    use crate::model::fixtures::*;
    use crate::model::{InstrumentIx as T, JobIx as J, OperatorIx as O};

    #[test]
    fn two_operator_example_reaches_optimum() {
        let inst = two_operator_three_jobs();
        let out = local_search(&inst, Some(&two_operator_schedule()), &SearchOptions::default()).unwrap();
        assert!(out.completed);
        assert_eq!(out.trace.len(), 1);
        assert!((out.trace[0].makespan - 65.0).abs() < 1e-9);
        assert!(matches!(out.trace[0].action, Move::SwapInter { .. }));
        assert!(explain(&inst, &out.schedule).is_empty());
    }

    #[test]
    fn fixpoint_is_returned_unchanged() {
        let inst = two_operator_three_jobs();
        let s = Schedule::from_routes(vec![vec![J(1), J(2)], vec![J(0)]]);
        let out = local_search(&inst, Some(&s), &SearchOptions::default()).unwrap();
        assert_eq!(out.schedule, s);
        assert!(out.trace.is_empty());
        assert!(out.completed);
    }

    #[test]
    fn greedy_seed_is_feasible() {
        for inst in [two_operator_three_jobs(), skills_instance(), instrument_instance()] {
            let s = greedy_seed(&inst).unwrap();
            assert!(explain(&inst, &s).iter().all(|e| e.code.is_efficiency()), "{s:?}");
        }
    }

    #[test]
    fn split_instruments_are_brought_together_first() {
        let inst = instrument_instance();
        // J1 on O1 needs I1 and I2; I2 sits with O2
        let s = Schedule::from_routes(vec![vec![J(0), J(3)], vec![J(1), J(2)]])
            .with_instruments(alloc(&[&[0, 1], &[2, 3]]));
        let out = local_search(&inst, Some(&s), &SearchOptions::default()).unwrap();
        assert_eq!(
            out.trace[0].action,
            Move::MoveInstrument {
                instrument: T(2),
                from: Some(O(1)),
                to: O(0)
            }
        );
        assert!(explain(&inst, &out.schedule).is_empty());
    }

    #[test]
    fn misplaced_job_is_repaired() {
        let inst = skills_instance();
        let s = Schedule::from_routes(vec![vec![J(0)], vec![J(1)], vec![J(2)]]);
        let out = local_search(&inst, Some(&s), &SearchOptions::default()).unwrap();
        assert!(matches!(out.trace[0].action, Move::RelocateInter { job: J(1), .. }));
        assert!(explain(&inst, &out.schedule).iter().all(|e| e.code != Code::SkillViolation));
    }

    #[test]
    fn cancelled_search_reports_partial_state() {
        let inst = two_operator_three_jobs();
        let opts = SearchOptions::default();
        opts.budget.cancel();
        let out = local_search(&inst, Some(&two_operator_schedule()), &opts).unwrap();
        assert!(!out.completed);
        assert_eq!(out.schedule, two_operator_schedule());
    }

    #[test]
    fn infeasible_seed_is_rejected() {
        let inst = two_operator_three_jobs();
        let s = Schedule::from_routes(vec![vec![J(0)], vec![]]);
        assert!(matches!(
            local_search(&inst, Some(&s), &SearchOptions::default()),
            Err(Error::Input(_))
        ));
    }
}
