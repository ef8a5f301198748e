//! Exhaustive search over assignments and route orders.

use std::sync::OnceLock;

use super::Plan;
use crate::cost::{cost_report, CostReport};
use crate::error::{Error, Result};
use crate::exec::{self, Budget, Execution};
use crate::model::{distance, JobIx, OperatorIx, ProblemInstance, Schedule};
use crate::tolerance::eps;

/// Largest search space [`brute_force`] accepts.
pub const SEARCH_LIMIT: u128 = 10_000_000;

const CHUNK: u64 = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub schedule: Schedule,
    pub report: CostReport,
}

/// Number of ways to split `n` jobs into `m` ordered routes:
/// `m (m+1) ... (m+n-1)`. Saturates at `u128::MAX`.
pub fn search_space_size(m: usize, n: usize) -> u128 {
    if n == 0 {
        return 1;
    }
    (0..n).fold(1u128, |acc, k| acc.saturating_mul(m as u128 + k as u128))
}

/// Shortest depot-to-depot order for every job subset, computed on demand.
struct Tours<'a> {
    inst: &'a ProblemInstance,
    dist: Vec<Vec<f64>>,
    memo: Vec<OnceLock<(f64, Vec<JobIx>)>>,
}

impl<'a> Tours<'a> {
    fn new(inst: &'a ProblemInstance) -> Self {
        let n = inst.num_jobs();
        // index n is the depot
        let point = |k: usize| if k == n { inst.depot } else { inst.jobs[k].location };
        let dist = (0..=n)
            .map(|a| (0..=n).map(|b| distance(point(a), point(b))).collect())
            .collect();
        Self {
            inst,
            dist,
            memo: (0..1usize << n).map(|_| OnceLock::new()).collect(),
        }
    }

    fn length(&self, order: &[usize]) -> f64 {
        let n = self.inst.num_jobs();
        let mut prev = n;
        let mut total = 0.0;
        for &j in order {
            total += self.dist[prev][j];
            prev = j;
        }
        total + self.dist[prev][n]
    }

    /// Permutations in lexicographic order; the first one that no later
    /// one beats by more than the tolerance.
    fn best(&self, mask: usize) -> &(f64, Vec<JobIx>) {
        self.memo[mask].get_or_init(|| {
            let mut order: Vec<usize> = (0..self.inst.num_jobs()).filter(|j| mask >> j & 1 == 1).collect();
            let mut best = (self.length(&order), order.clone());
            while next_permutation(&mut order) {
                let d = self.length(&order);
                if d < best.0 - eps() {
                    best = (d, order.clone());
                }
            }
            (best.0, best.1.into_iter().map(JobIx).collect())
        })
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("v[i] qualifies");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

struct Space<'a> {
    inst: &'a ProblemInstance,
    plan: &'a Plan,
    tours: Tours<'a>,
    total: u64,
}

impl Space<'_> {
    /// Operator per group for assignment number `index`; group 0 is the
    /// most significant digit, so index order is lexicographic order of
    /// the per-job assignment vector.
    fn decode(&self, mut index: u64, choice: &mut [OperatorIx]) {
        for g in (0..self.plan.groups.len()).rev() {
            let ops = &self.plan.group_ops[g];
            let r = ops.len() as u64;
            choice[g] = ops[(index % r) as usize];
            index /= r;
        }
    }

    fn masks(&self, choice: &[OperatorIx]) -> Vec<usize> {
        let mut masks = vec![0usize; self.inst.num_operators()];
        for (g, jobs) in self.plan.groups.iter().enumerate() {
            for j in jobs {
                masks[choice[g].0] |= 1 << j.0;
            }
        }
        masks
    }

    fn makespan(&self, masks: &[usize]) -> f64 {
        let inst = self.inst;
        masks
            .iter()
            .enumerate()
            .map(|(i, &mask)| {
                if mask == 0 {
                    return 0.0;
                }
                let processing: f64 = (0..inst.num_jobs())
                    .filter(|j| mask >> j & 1 == 1)
                    .map(|j| inst.processing_time(OperatorIx(i), JobIx(j)))
                    .sum();
                inst.alpha * processing + inst.beta * self.tours.best(mask).0
            })
            .fold(0.0, f64::max)
    }

    fn scan(&self, range: std::ops::Range<u64>, budget: &Budget) -> Result<Option<(f64, u64)>> {
        let mut choice = vec![OperatorIx(0); self.plan.groups.len()];
        let mut best: Option<(f64, u64)> = None;
        for index in range {
            if budget.exhausted() {
                return Err(Error::Cancelled);
            }
            self.decode(index, &mut choice);
            let c = self.makespan(&self.masks(&choice));
            if best.is_none_or(|(b, _)| c < b - eps()) {
                best = Some((c, index));
            }
        }
        Ok(best)
    }
}

/// An optimal schedule by exhaustive enumeration, using the default
/// execution mode and no deadline.
pub fn brute_force(inst: &ProblemInstance) -> Result<Solution> {
    brute_force_with(inst, Execution::default(), &Budget::unlimited())
}

/// Enumerates every assignment that respects skills and instrument
/// co-location and, per operator, every route order. Returns the first
/// minimiser of the makespan in lexicographic assignment order; each
/// route is the first distance-optimal order of its jobs.
pub fn brute_force_with(inst: &ProblemInstance, exec: Execution, budget: &Budget) -> Result<Solution> {
    let plan = Plan::new(inst)?;
    let size = search_space_size(inst.num_operators(), inst.num_jobs());
    if size > SEARCH_LIMIT {
        return Err(Error::BoundExceeded {
            size,
            limit: SEARCH_LIMIT,
        });
    }
    let total: u64 = plan.group_ops.iter().map(|ops| ops.len() as u64).product();
    let space = Space {
        inst,
        plan: &plan,
        tours: Tours::new(inst),
        total,
    };
    let parts = exec::map_chunks(exec, space.total, CHUNK, |r| space.scan(r, budget));
    let mut best: Option<(f64, u64)> = None;
    for part in parts {
        if let Some((c, index)) = part? {
            if best.is_none_or(|(b, _)| c < b - eps()) {
                best = Some((c, index));
            }
        }
    }
    let (_, index) = best.expect("a feasible plan has at least one assignment");

    let mut choice = vec![OperatorIx(0); plan.groups.len()];
    space.decode(index, &mut choice);
    let routes = space
        .masks(&choice)
        .into_iter()
        .map(|mask| if mask == 0 { Vec::new() } else { space.tours.best(mask).1.clone() })
        .collect();
    let instruments = plan.allocate(inst, |j| choice[plan.group_of[j.0]]);
    let schedule = Schedule { routes, instruments };
    let report = cost_report(inst, &schedule)?;
    Ok(Solution { schedule, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;

    #[test]
    fn rising_factorial() {
        assert_eq!(search_space_size(2, 3), 2 * 3 * 4);
        assert_eq!(search_space_size(1, 10), 3_628_800);
        assert_eq!(search_space_size(5, 0), 1);
        assert_eq!(search_space_size(0, 2), 0);
        assert_eq!(search_space_size(usize::MAX, 10), u128::MAX);
    }

    #[test]
    fn permutations_in_order() {
        let mut v = vec![0, 1, 2];
        let mut seen = vec![v.clone()];
        while next_permutation(&mut v) {
            seen.push(v.clone());
        }
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[1], vec![0, 2, 1]);
        assert_eq!(seen[5], vec![2, 1, 0]);
    }

    #[test]
    fn two_operator_optimum() {
        let inst = two_operator_three_jobs();
        for exec in [Execution::Sequential, Execution::Parallel] {
            let sol = brute_force_with(&inst, exec, &Budget::unlimited()).unwrap();
            assert!((sol.report.makespan - 65.0).abs() < 1e-9);
            assert_eq!(sol.schedule.routes, vec![vec![JobIx(1), JobIx(2)], vec![JobIx(0)]]);
        }
    }

    #[test]
    fn single_job_single_operator() {
        let mut inst = two_operator_three_jobs();
        inst.operators.truncate(1);
        inst.processing = vec![vec![3.0]];
        inst.jobs.truncate(1);
        let sol = brute_force(&inst).unwrap();
        assert_eq!(sol.schedule.routes, vec![vec![JobIx(0)]]);
        assert_eq!(sol.report.makespan, 6.5);
    }

    #[test]
    fn skills_are_respected() {
        let inst = skills_instance();
        let sol = brute_force(&inst).unwrap();
        assert!(!sol.schedule.routes[2].contains(&JobIx(0)));
        assert!(!sol.schedule.routes[1].contains(&JobIx(1)));
        assert!(!sol.schedule.routes[1].contains(&JobIx(2)));
    }

    #[test]
    fn instruments_follow_jobs() {
        let inst = instrument_instance();
        let sol = brute_force(&inst).unwrap();
        assert!(crate::explain::explain(&inst, &sol.schedule).is_empty());
    }

    #[test]
    fn bound_is_enforced() {
        let mut inst = two_operator_three_jobs();
        let extra: Vec<_> = (0..9).map(|k| job(&format!("X{k}"), k as f64, 1.0)).collect();
        inst.jobs.extend(extra);
        for row in &mut inst.processing {
            row.resize(12, 1.0);
        }
        assert!(matches!(brute_force(&inst), Err(Error::BoundExceeded { .. })));
    }

    #[test]
    fn cancelled_budget() {
        let inst = two_operator_three_jobs();
        let b = Budget::unlimited();
        b.cancel();
        assert_eq!(brute_force_with(&inst, Execution::Sequential, &b), Err(Error::Cancelled));
    }
}
