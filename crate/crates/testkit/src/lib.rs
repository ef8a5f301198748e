//! Reference implementations and random instances for the argwf test
//! suites.
//!
//! Nothing here calls into the engine's cost, exchange or solver code:
//! costs, exchange predicates and optima are recomputed from raw
//! coordinates so they can serve as oracles.

use std::collections::BTreeSet;

use argwf_core::{InstrumentSpec, JobIx, JobSpec, OperatorSpec, Point, ProblemInstance, Schedule};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const EPS: f64 = 1e-9;

/// Shape of generated instances.
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_operators: usize,
    pub max_jobs: usize,
    /// Skill pool size; 0 disables skills.
    pub skills: usize,
    pub instruments: usize,
}

impl Shape {
    pub const SMALL: Shape = Shape {
        max_operators: 3,
        max_jobs: 4,
        skills: 0,
        instruments: 0,
    };
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Integer coordinates in `[0, 15]`, integer processing times in
/// `[1, 120]`, depot at the origin, equal weights. At least one operator
/// and one job. With skills enabled the first operator holds every skill,
/// so some assignment always satisfies the skill constraints.
pub fn random_instance(rng: &mut impl Rng, shape: Shape) -> ProblemInstance {
    let m = rng.random_range(1..=shape.max_operators);
    let n = rng.random_range(1..=shape.max_jobs);
    random_instance_sized(rng, m, n, shape)
}

pub fn random_instance_sized(rng: &mut impl Rng, m: usize, n: usize, shape: Shape) -> ProblemInstance {
    let skills: Vec<String> = (0..shape.skills).map(|k| format!("S{k}")).collect();
    let pick = |rng: &mut dyn rand::RngCore, p: f64| -> BTreeSet<String> {
        skills.iter().filter(|_| rng.random_bool(p)).cloned().collect()
    };
    let operators = (0..m)
        .map(|i| OperatorSpec {
            id: format!("O{}", i + 1),
            skills: if i == 0 { skills.iter().cloned().collect() } else { pick(rng, 0.6) },
        })
        .collect();
    let instruments: Vec<InstrumentSpec> = (0..shape.instruments)
        .map(|t| InstrumentSpec {
            id: format!("I{}", t + 1),
            required_skills: pick(rng, 0.2),
        })
        .collect();
    let ids: Vec<String> = instruments.iter().map(|t| t.id.clone()).collect();
    let jobs = (0..n)
        .map(|j| JobSpec {
            id: format!("J{}", j + 1),
            location: Point::new(rng.random_range(0..=15) as f64, rng.random_range(0..=15) as f64),
            required_skills: pick(rng, 0.3),
            required_instruments: if ids.is_empty() || !rng.random_bool(0.4) {
                BTreeSet::new()
            } else {
                [ids.choose(rng).expect("non-empty").clone()].into()
            },
        })
        .collect();
    let processing = (0..m)
        .map(|_| (0..n).map(|_| rng.random_range(1..=120) as f64).collect())
        .collect();
    ProblemInstance {
        operators,
        jobs,
        instruments,
        skills: skills.into_iter().collect(),
        processing,
        alpha: 0.5,
        beta: 0.5,
        depot: Point::ORIGIN,
    }
}

/// Every way of splitting the jobs into ordered routes, ignoring skills
/// and instruments (no instruments allocated).
pub fn all_schedules(m: usize, n: usize) -> Vec<Schedule> {
    let mut out = Vec::new();
    let mut routes = vec![Vec::new(); m];
    fn place(j: usize, n: usize, routes: &mut Vec<Vec<JobIx>>, out: &mut Vec<Schedule>) {
        if j == n {
            out.push(Schedule::from_routes(routes.clone()));
            return;
        }
        for i in 0..routes.len() {
            for slot in 0..=routes[i].len() {
                routes[i].insert(slot, JobIx(j));
                place(j + 1, n, routes, out);
                routes[i].remove(slot);
            }
        }
    }
    place(0, n, &mut routes, &mut out);
    out
}

fn dist(a: Point, b: Point) -> f64 {
    ((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y)).sqrt()
}

fn loc(inst: &ProblemInstance, j: Option<JobIx>) -> Point {
    j.map_or(inst.depot, |j| inst.jobs[j.0].location)
}

/// Travel distance of a route, depot to depot.
pub fn ref_route_distance(inst: &ProblemInstance, route: &[JobIx]) -> f64 {
    let mut prev = inst.depot;
    let mut total = 0.0;
    for j in route {
        let p = inst.jobs[j.0].location;
        total += dist(prev, p);
        prev = p;
    }
    total + dist(prev, inst.depot)
}

pub fn ref_costs(inst: &ProblemInstance, sched: &Schedule) -> Vec<f64> {
    sched
        .routes
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let p: f64 = r.iter().map(|j| inst.processing[i][j.0]).sum();
            inst.alpha * p + inst.beta * ref_route_distance(inst, r)
        })
        .collect()
}

pub fn ref_makespan(inst: &ProblemInstance, sched: &Schedule) -> f64 {
    ref_costs(inst, sched).into_iter().fold(0.0, f64::max)
}

pub fn ref_feasible(inst: &ProblemInstance, sched: &Schedule) -> bool {
    let mut seen = vec![0; inst.jobs.len()];
    for r in &sched.routes {
        for j in r {
            seen[j.0] += 1;
        }
    }
    seen.iter().all(|&c| c == 1)
}

fn has_skills(inst: &ProblemInstance, i: usize, j: JobIx) -> bool {
    inst.jobs[j.0].required_skills.is_subset(&inst.operators[i].skills)
}

fn critical(costs: &[f64]) -> Vec<usize> {
    let cmax = costs.iter().copied().fold(0.0, f64::max);
    (0..costs.len()).filter(|&i| (costs[i] - cmax).abs() <= EPS).collect()
}

/// A relocation of a critical operator's job to another operator satisfies
/// the single exchange inequality strictly and lowers the makespan.
/// Instances must be instrument-free; a move onto an operator missing
/// skills the job needs only counts if the job's current operator is
/// also missing them.
pub fn ref_violates_sep_plus(inst: &ProblemInstance, sched: &Schedule) -> bool {
    let costs = ref_costs(inst, sched);
    let cmax = costs.iter().copied().fold(0.0, f64::max);
    let (a, b) = (inst.alpha, inst.beta);
    for i in critical(&costs) {
        for &j in &sched.routes[i] {
            for i2 in (0..costs.len()).filter(|&k| k != i) {
                if !has_skills(inst, i2, j) && has_skills(inst, i, j) {
                    continue;
                }
                let target = &sched.routes[i2];
                for slot in 0..=target.len() {
                    let pred = slot.checked_sub(1).map(|s| target[s]);
                    let succ = target.get(slot).copied();
                    let (lp, lj, ls) = (loc(inst, pred), loc(inst, Some(j)), loc(inst, succ));
                    let lhs = costs[i] - costs[i2];
                    let rhs = a * inst.processing[i2][j.0] + b * (dist(lp, lj) + dist(lj, ls) - dist(lp, ls));
                    if lhs <= rhs + EPS {
                        continue;
                    }
                    let mut after = sched.clone();
                    after.routes[i].retain(|&x| x != j);
                    after.routes[i2].insert(slot, j);
                    if cmax - ref_makespan(inst, &after) > EPS {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// A swap between a critical operator's job and another operator's job
/// lowers the critical operator's cost (premise), satisfies the pairwise
/// inequality strictly and lowers the makespan. Same restrictions as
/// [`ref_violates_sep_plus`].
pub fn ref_violates_pep_plus(inst: &ProblemInstance, sched: &Schedule) -> bool {
    let costs = ref_costs(inst, sched);
    let cmax = costs.iter().copied().fold(0.0, f64::max);
    let (a, b) = (inst.alpha, inst.beta);
    let nb = |r: &[JobIx], k: usize| (k.checked_sub(1).map(|p| r[p]), r.get(k + 1).copied());
    for i in critical(&costs) {
        let r = &sched.routes[i];
        for (k, &j) in r.iter().enumerate() {
            for i2 in (0..costs.len()).filter(|&o| o != i) {
                let r2 = &sched.routes[i2];
                for (k2, &j2) in r2.iter().enumerate() {
                    let lose = |op: usize, job: JobIx| !has_skills(inst, op, job);
                    if (lose(i2, j) && !lose(i, j)) || (lose(i, j2) && !lose(i2, j2)) {
                        continue;
                    }
                    let (jm, jp) = nb(r, k);
                    let (j2m, j2p) = nb(r2, k2);
                    let (pjm, pj, pjp) = (loc(inst, jm), loc(inst, Some(j)), loc(inst, jp));
                    let (p2m, p2, p2p) = (loc(inst, j2m), loc(inst, Some(j2)), loc(inst, j2p));
                    let premise_l = b * ((dist(pjm, pj) + dist(pj, pjp)) - (dist(pjm, p2) + dist(p2, pjp)));
                    let premise_r = a * (inst.processing[i][j2.0] - inst.processing[i][j.0]);
                    if premise_l <= premise_r + EPS {
                        continue;
                    }
                    let lhs = costs[i] - costs[i2];
                    let rhs = a * (inst.processing[i2][j.0] - inst.processing[i2][j2.0])
                        + b * (dist(p2m, pj) + dist(pj, p2p) - dist(p2m, p2) - dist(p2, p2p));
                    if lhs <= rhs + EPS {
                        continue;
                    }
                    let mut after = sched.clone();
                    after.routes[i][k] = j2;
                    after.routes[i2][k2] = j;
                    if cmax - ref_makespan(inst, &after) > EPS {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// Some route gets strictly shorter by moving one of its jobs elsewhere
/// in the same route.
pub fn ref_violates_isep(inst: &ProblemInstance, sched: &Schedule) -> bool {
    sched.routes.iter().any(|r| {
        let d = ref_route_distance(inst, r);
        (0..r.len()).any(|k| {
            let mut rest = r.clone();
            let j = rest.remove(k);
            (0..=rest.len()).filter(|&s| s != k).any(|s| {
                let mut c = rest.clone();
                c.insert(s, j);
                d - ref_route_distance(inst, &c) > EPS
            })
        })
    })
}

/// Some route gets strictly shorter by swapping two of its jobs.
pub fn ref_violates_ipep(inst: &ProblemInstance, sched: &Schedule) -> bool {
    sched.routes.iter().any(|r| {
        let d = ref_route_distance(inst, r);
        (0..r.len()).any(|k| {
            (k + 1..r.len()).any(|k2| {
                let mut c = r.clone();
                c.swap(k, k2);
                d - ref_route_distance(inst, &c) > EPS
            })
        })
    })
}

/// All orders of `jobs`.
pub fn permutations(jobs: &[JobIx]) -> Vec<Vec<JobIx>> {
    if jobs.len() <= 1 {
        return vec![jobs.to_vec()];
    }
    let mut out = Vec::new();
    for k in 0..jobs.len() {
        let mut rest = jobs.to_vec();
        let first = rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

/// Shortest route distance over all orders of `route`'s jobs.
pub fn ref_best_route_distance(inst: &ProblemInstance, route: &[JobIx]) -> f64 {
    permutations(route)
        .iter()
        .map(|r| ref_route_distance(inst, r))
        .fold(f64::INFINITY, f64::min)
}

/// Minimum makespan over every schedule whose operators have the skills of
/// their jobs. Instances must be instrument-free.
pub fn ref_optimum(inst: &ProblemInstance) -> Option<f64> {
    all_schedules(inst.operators.len(), inst.jobs.len())
        .iter()
        .filter(|s| {
            s.routes
                .iter()
                .enumerate()
                .all(|(i, r)| r.iter().all(|&j| has_skills(inst, i, j)))
        })
        .map(|s| ref_makespan(inst, s))
        .reduce(f64::min)
}

/// A random assignment with random route orders; every job exactly once.
pub fn random_schedule(rng: &mut impl Rng, m: usize, n: usize) -> Schedule {
    let mut routes = vec![Vec::new(); m];
    for j in 0..n {
        let i = rng.random_range(0..m);
        let slot = rng.random_range(0..=routes[i].len());
        routes[i].insert(slot, JobIx(j));
    }
    Schedule::from_routes(routes)
}
