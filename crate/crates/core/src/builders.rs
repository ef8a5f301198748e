//! Construction of the scheduling frameworks and of the extensions a
//! schedule induces in them.

use std::collections::BTreeSet;

use crate::af::{ArgGraph, Argument};
use crate::error::{Error, Result};
use crate::exchange::Snapshot;
use crate::model::{FixedDecisions, ProblemInstance, Qualifications, Schedule};

/// The frameworks that can be built for an instance and schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AfKind {
    Feasibility,
    /// Extended cost efficiency.
    Efficiency,
    /// Individual (route distance) efficiency.
    Individual,
    Skills,
    /// Instrument allocation with instrument skill requirements.
    Instrument,
    JobInstrument,
}

impl AfKind {
    pub const ALL: [AfKind; 6] = [
        AfKind::Feasibility,
        AfKind::Efficiency,
        AfKind::Individual,
        AfKind::Skills,
        AfKind::Instrument,
        AfKind::JobInstrument,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AfKind::Feasibility => "feasibility",
            AfKind::Efficiency => "efficiency",
            AfKind::Individual => "individual",
            AfKind::Skills => "skills",
            AfKind::Instrument => "instrument",
            AfKind::JobInstrument => "job-instrument",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

fn assignment_graph(inst: &ProblemInstance) -> ArgGraph<Argument> {
    ArgGraph::new(
        inst.operator_ixs()
            .flat_map(|i| inst.job_ixs().map(move |j| Argument::Assign(i, j))),
    )
}

fn add(g: &mut ArgGraph<Argument>, a: Argument, b: Argument) {
    g.add_attack(&a, &b)
        .expect("builders only attack arguments they created");
}

/// `a(i,j)` attacks `a(k,j)` for every pair of distinct operators: each
/// job goes to exactly one operator.
pub fn feasibility_af(inst: &ProblemInstance) -> ArgGraph<Argument> {
    let mut g = assignment_graph(inst);
    for j in inst.job_ixs() {
        for i in inst.operator_ixs() {
            for k in inst.operator_ixs().filter(|&k| k != i) {
                add(&mut g, Argument::Assign(i, j), Argument::Assign(k, j));
            }
        }
    }
    g
}

/// Feasibility attacks plus self-attacks on forbidden pairs, minus every
/// attack onto a mandated pair.
pub fn fixed_decision_af(inst: &ProblemInstance, fd: &FixedDecisions) -> Result<ArgGraph<Argument>> {
    let mut g = feasibility_af(inst);
    for &(i, j) in &fd.negative {
        let a = Argument::Assign(i, j);
        g.add_attack(&a, &a)
            .map_err(|_| Error::Input(format!("forbidden pair (#{}, #{}) is out of range", i.0, j.0)))?;
    }
    for &(i, j) in &fd.positive {
        let a = Argument::Assign(i, j);
        if !g.contains(&a) {
            return Err(Error::Input(format!("mandated pair (#{}, #{}) is out of range", i.0, j.0)));
        }
        g.remove_attacks_on(&a);
    }
    Ok(g)
}

/// Feasibility attacks with self-attacks wherever the operator lacks a
/// skill the job needs.
pub fn skill_af(inst: &ProblemInstance) -> ArgGraph<Argument> {
    let mut g = feasibility_af(inst);
    let q = Qualifications::new(inst);
    for i in inst.operator_ixs() {
        for j in inst.job_ixs().filter(|j| !q.job_ok[i.0][j.0]) {
            add(&mut g, Argument::Assign(i, j), Argument::Assign(i, j));
        }
    }
    g
}

/// The extended cost efficiency framework.
///
/// A relocation violation of job `j` from `i` to `i'` removes the attack
/// `a(i,j) -> a(i',j)`; a swap violation between `j` on `i` and `j'` on
/// `i'` adds `a(i',j') -> a(i,j)`. Schedules that are not feasible get the
/// plain feasibility framework.
pub fn extended_cost_af(inst: &ProblemInstance, sched: &Schedule) -> ArgGraph<Argument> {
    let mut g = feasibility_af(inst);
    let Ok(snap) = Snapshot::new(inst, sched) else {
        return g;
    };
    for v in snap.sep_plus() {
        g.remove_attack(&Argument::Assign(v.operator, v.job), &Argument::Assign(v.target_operator, v.job));
    }
    for v in snap.pep_plus() {
        let other = v.target_job.expect("pairwise violations name a partner");
        add(&mut g, Argument::Assign(v.target_operator, other), Argument::Assign(v.operator, v.job));
    }
    g
}

/// The individual cost efficiency framework: a self-attack on `a(i,j)`
/// when relocating `j` within its route shortens it, and mutual attacks
/// between two jobs of a route whose swap shortens it.
pub fn individual_af(inst: &ProblemInstance, sched: &Schedule) -> ArgGraph<Argument> {
    let mut g = feasibility_af(inst);
    let Ok(snap) = Snapshot::new(inst, sched) else {
        return g;
    };
    for v in snap.isep() {
        let a = Argument::Assign(v.operator, v.job);
        add(&mut g, a, a);
    }
    for v in snap.ipep() {
        let a = Argument::Assign(v.operator, v.job);
        let b = Argument::Assign(v.operator, v.target_job.expect("pairwise violations name a partner"));
        add(&mut g, a, b);
        add(&mut g, b, a);
    }
    g
}

/// Instrument allocation: each instrument to exactly one operator, with a
/// self-attack on `a(i,t)` when the operator lacks a skill the instrument
/// needs.
pub fn instrument_feasibility_af(inst: &ProblemInstance) -> ArgGraph<Argument> {
    let mut g = ArgGraph::new(
        inst.operator_ixs()
            .flat_map(|i| inst.instrument_ixs().map(move |t| Argument::Hold(i, t))),
    );
    let q = Qualifications::new(inst);
    for t in inst.instrument_ixs() {
        for i in inst.operator_ixs() {
            for k in inst.operator_ixs().filter(|&k| k != i) {
                add(&mut g, Argument::Hold(i, t), Argument::Hold(k, t));
            }
            if !q.holds_ok[i.0][t.0] {
                add(&mut g, Argument::Hold(i, t), Argument::Hold(i, t));
            }
        }
    }
    g
}

/// Job–instrument pairing: `a(j,t)` attacks itself unless `j` is assigned
/// and every holder of `t` is the operator serving `j`.
pub fn job_instrument_af(inst: &ProblemInstance, sched: &Schedule) -> ArgGraph<Argument> {
    let mut g = ArgGraph::new(
        inst.job_ixs()
            .flat_map(|j| inst.instrument_ixs().map(move |t| Argument::Require(j, t))),
    );
    let assignment = sched.assignment(inst.num_jobs());
    for t in inst.instrument_ixs() {
        let holders: Vec<usize> = sched
            .instruments
            .iter()
            .enumerate()
            .filter(|(_, set)| set.contains(&t))
            .map(|(i, _)| i)
            .collect();
        for j in inst.job_ixs() {
            let paired = match assignment[j.0] {
                Some(o) => !holders.is_empty() && holders.iter().all(|&h| h == o.0),
                None => false,
            };
            if !paired {
                add(&mut g, Argument::Require(j, t), Argument::Require(j, t));
            }
        }
    }
    g
}

/// `E ≈ S`: the operator–job pairs of the schedule.
pub fn schedule_extension(sched: &Schedule) -> BTreeSet<Argument> {
    sched
        .routes
        .iter()
        .enumerate()
        .flat_map(|(i, r)| r.iter().map(move |&j| Argument::Assign(i.into(), j)))
        .collect()
}

/// `E ≈ SI`: the operator–instrument pairs of the allocation.
pub fn allocation_extension(sched: &Schedule) -> BTreeSet<Argument> {
    sched
        .instruments
        .iter()
        .enumerate()
        .flat_map(|(i, set)| set.iter().map(move |&t| Argument::Hold(i.into(), t)))
        .collect()
}

/// `E ≈ ζ`: the job–instrument requirements of the instance.
pub fn requirement_extension(inst: &ProblemInstance) -> BTreeSet<Argument> {
    inst.job_ixs()
        .flat_map(|j| inst.job_instruments(j).into_iter().map(move |t| Argument::Require(j, t)))
        .collect()
}

pub fn build(kind: AfKind, inst: &ProblemInstance, sched: &Schedule) -> ArgGraph<Argument> {
    match kind {
        AfKind::Feasibility => feasibility_af(inst),
        AfKind::Efficiency => extended_cost_af(inst, sched),
        AfKind::Individual => individual_af(inst, sched),
        AfKind::Skills => skill_af(inst),
        AfKind::Instrument => instrument_feasibility_af(inst),
        AfKind::JobInstrument => job_instrument_af(inst, sched),
    }
}

/// The extension `kind` is checked against.
pub fn extension(kind: AfKind, inst: &ProblemInstance, sched: &Schedule) -> BTreeSet<Argument> {
    match kind {
        AfKind::Instrument => allocation_extension(sched),
        AfKind::JobInstrument => requirement_extension(inst),
        _ => schedule_extension(sched),
    }
}
