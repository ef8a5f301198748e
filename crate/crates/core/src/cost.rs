//! Extended cost: weighted processing time plus weighted travel distance.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::{distance, JobIx, OperatorIx, ProblemInstance, Schedule};
use crate::tolerance;

/// Travel distance of a job sequence that starts and ends at the depot.
pub fn sequence_distance(inst: &ProblemInstance, route: &[JobIx]) -> f64 {
    let (Some(&first), Some(&last)) = (route.first(), route.last()) else {
        return 0.0;
    };
    let inner: f64 = route
        .windows(2)
        .map(|w| distance(inst.location(w[0]), inst.location(w[1])))
        .sum();
    distance(inst.depot, inst.location(first)) + inner + distance(inst.location(last), inst.depot)
}

/// `alpha * processing + beta * travel` for one operator's sequence.
pub fn sequence_cost(inst: &ProblemInstance, op: OperatorIx, route: &[JobIx]) -> f64 {
    let processing: f64 = route.iter().map(|&j| inst.processing_time(op, j)).sum();
    inst.alpha * processing + inst.beta * sequence_distance(inst, route)
}

fn checked_route<'a>(inst: &ProblemInstance, sched: &'a Schedule, op: OperatorIx) -> Result<&'a [JobIx]> {
    let route = sched
        .routes
        .get(op.0)
        .ok_or_else(|| Error::Input(format!("schedule has no route for operator #{}", op.0)))?;
    if op.0 >= inst.num_operators() {
        return Err(Error::Input(format!("unknown operator #{}", op.0)));
    }
    if let Some(j) = route.iter().find(|j| j.0 >= inst.num_jobs()) {
        return Err(Error::Input(format!(
            "route of operator {} references unknown job #{}",
            inst.operators[op.0].id, j.0
        )));
    }
    Ok(route)
}

/// Extended cost `C_i` of one operator; 0 for an empty route.
pub fn operator_cost(inst: &ProblemInstance, sched: &Schedule, op: OperatorIx) -> Result<f64> {
    let route = checked_route(inst, sched, op)?;
    Ok(sequence_cost(inst, op, route))
}

/// Travel component only: depot to first job, between jobs, last job back.
pub fn route_distance(inst: &ProblemInstance, sched: &Schedule, op: OperatorIx) -> Result<f64> {
    let route = checked_route(inst, sched, op)?;
    Ok(sequence_distance(inst, route))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostReport {
    pub per_operator: Vec<(OperatorIx, f64)>,
    pub distances: Vec<f64>,
    pub makespan: f64,
    /// Operators within tolerance of the makespan.
    pub critical_operators: BTreeSet<OperatorIx>,
}

impl CostReport {
    pub fn cost(&self, op: OperatorIx) -> f64 {
        self.per_operator[op.0].1
    }

    pub fn total_distance(&self) -> f64 {
        self.distances.iter().sum()
    }

    pub fn is_critical(&self, op: OperatorIx) -> bool {
        self.critical_operators.contains(&op)
    }
}

pub fn cost_report(inst: &ProblemInstance, sched: &Schedule) -> Result<CostReport> {
    let mut per_operator = Vec::with_capacity(inst.num_operators());
    let mut distances = Vec::with_capacity(inst.num_operators());
    for op in inst.operator_ixs() {
        let route = checked_route(inst, sched, op)?;
        per_operator.push((op, sequence_cost(inst, op, route)));
        distances.push(sequence_distance(inst, route));
    }
    Ok(report_from_costs(per_operator, distances))
}

pub(crate) fn report_from_costs(per_operator: Vec<(OperatorIx, f64)>, distances: Vec<f64>) -> CostReport {
    let makespan = per_operator.iter().map(|c| c.1).fold(0.0, f64::max);
    let critical_operators = per_operator
        .iter()
        .filter(|(_, c)| tolerance::approx_eq(*c, makespan))
        .map(|(i, _)| *i)
        .collect();
    CostReport {
        per_operator,
        distances,
        makespan,
        critical_operators,
    }
}

/// Makespan and total distance, without the per-operator breakdown.
pub(crate) fn objective(inst: &ProblemInstance, sched: &Schedule) -> (f64, f64) {
    sched
        .routes
        .iter()
        .enumerate()
        .fold((0.0f64, 0.0f64), |(cmax, dist), (i, r)| {
            let d = sequence_distance(inst, r);
            let processing: f64 = r.iter().map(|&j| inst.processing_time(OperatorIx(i), j)).sum();
            (cmax.max(inst.alpha * processing + inst.beta * d), dist + d)
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::model::{JobSpec, OperatorSpec, Point};

    fn single_job_instance() -> ProblemInstance {
        ProblemInstance {
            operators: vec![OperatorSpec {
                id: "O1".into(),
                skills: Default::default(),
            }],
            jobs: vec![JobSpec {
                id: "J1".into(),
                location: Point::new(3.0, 4.0),
                required_skills: Default::default(),
                required_instruments: Default::default(),
            }],
            instruments: vec![],
            skills: Default::default(),
            processing: vec![vec![3.0]],
            alpha: 0.5,
            beta: 0.5,
            depot: Point::ORIGIN,
        }
    }

    #[test]
    fn single_job_round_trip() {
        let inst = single_job_instance();
        let s = Schedule::from_routes(vec![vec![JobIx(0)]]);
        assert_eq!(operator_cost(&inst, &s, OperatorIx(0)).unwrap(), 6.5);
        assert_eq!(route_distance(&inst, &s, OperatorIx(0)).unwrap(), 10.0);
    }

    #[test]
    fn empty_route_costs_nothing() {
        let inst = single_job_instance();
        let s = Schedule::empty(1);
        assert_eq!(operator_cost(&inst, &s, OperatorIx(0)).unwrap(), 0.0);
        assert_eq!(route_distance(&inst, &s, OperatorIx(0)).unwrap(), 0.0);
        let report = cost_report(&inst, &s).unwrap();
        assert_eq!(report.makespan, 0.0);
        assert_eq!(report.critical_operators.len(), 1);
    }

    #[test]
    fn two_operator_costs() {
        let inst = two_operator_three_jobs();
        let s = two_operator_schedule();
        let c1 = operator_cost(&inst, &s, OperatorIx(0)).unwrap();
        let expected = 0.5 * 150.0 + 0.5 * (5.0 + 68f64.sqrt() + 13.0);
        assert!((c1 - expected).abs() < 1e-12);
        assert!((c1 - 88.123).abs() < 1e-3);
        assert_eq!(route_distance(&inst, &s, OperatorIx(1)).unwrap(), 26.0);
        let report = cost_report(&inst, &s).unwrap();
        assert_eq!(report.cost(OperatorIx(1)), 43.0);
        assert_eq!(report.critical_operators, [OperatorIx(0)].into());
    }

    #[test]
    fn relocating_third_job_balances_load() {
        let inst = two_operator_three_jobs();
        let s = Schedule::from_routes(vec![vec![JobIx(0)], vec![JobIx(2), JobIx(1)]]);
        let report = cost_report(&inst, &s).unwrap();
        assert_eq!(report.cost(OperatorIx(0)), 65.0);
        assert_eq!(report.cost(OperatorIx(1)), 73.0);
        assert_eq!(report.makespan, 73.0);
    }

    #[test]
    fn unknown_job_is_an_input_error() {
        let inst = two_operator_three_jobs();
        let s = Schedule::from_routes(vec![vec![JobIx(7)], vec![]]);
        assert!(matches!(operator_cost(&inst, &s, OperatorIx(0)), Err(Error::Input(_))));
        assert!(cost_report(&inst, &s).is_err());
    }
}
