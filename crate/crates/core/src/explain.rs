//! Explanations drawn from the attacks and non-attacks of the frameworks.
//!
//! Every explanation names the framework it comes from and the attack (or
//! missing attack) that grounds it. Efficiency explanations also carry the
//! move that removes the violation and the improvement it brings.

use std::collections::BTreeMap;

use crate::af::Argument;
use crate::builders::{self, AfKind};
use crate::exchange::{ExchangeKind, ExchangeViolation, Snapshot};
use crate::model::{InstrumentIx, JobIx, OperatorIx, ProblemInstance, Qualifications, Schedule};
use crate::moves::MoveSuggestion;

/// Default number of explanations returned to interactive clients.
pub const DEFAULT_CAP: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Code {
    NotFeasibleUnassigned,
    NotFeasibleMulti,
    NotExtendedEfficient,
    SkillViolation,
    NotIndividuallyEfficient,
    InstrumentFeasibility,
    InstrumentSkillViolation,
    JobInstrumentViolation,
    /// The schedule cannot be read against the instance at all.
    MalformedSchedule,
}

impl Code {
    pub const ALL: [Code; 9] = [
        Code::NotFeasibleUnassigned,
        Code::NotFeasibleMulti,
        Code::NotExtendedEfficient,
        Code::SkillViolation,
        Code::NotIndividuallyEfficient,
        Code::InstrumentFeasibility,
        Code::InstrumentSkillViolation,
        Code::JobInstrumentViolation,
        Code::MalformedSchedule,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Code::NotFeasibleUnassigned => "NOT_FEASIBLE_UNASSIGNED",
            Code::NotFeasibleMulti => "NOT_FEASIBLE_MULTI",
            Code::NotExtendedEfficient => "NOT_EXTENDED_EFFICIENT",
            Code::SkillViolation => "SKILL_VIOLATION",
            Code::NotIndividuallyEfficient => "NOT_INDIVIDUALLY_EFFICIENT",
            Code::InstrumentFeasibility => "INSTRUMENT_FEASIBILITY",
            Code::InstrumentSkillViolation => "INSTRUMENT_SKILL_VIOLATION",
            Code::JobInstrumentViolation => "JOB_INSTRUMENT_VIOLATION",
            Code::MalformedSchedule => "MALFORMED_SCHEDULE",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }

    pub fn is_efficiency(self) -> bool {
        matches!(self, Code::NotExtendedEfficient | Code::NotIndividuallyEfficient)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    Attack,
    NonAttack,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Attack => "attack",
            Relation::NonAttack => "non-attack",
        }
    }
}

/// The attack or non-attack an explanation is grounded in.
///
/// For an attack, `source` attacks `target` in the framework. For a
/// non-attack, `target` lies outside the extension and no member attacks
/// it; `source` names the member whose attack is missing, when there is
/// one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ground {
    pub af: AfKind,
    pub relation: Relation,
    pub source: Option<Argument>,
    pub target: Option<Argument>,
}

/// Entity-level facts the message is rendered from.
#[derive(Debug, Clone, PartialEq)]
pub enum Detail {
    Unassigned { job: JobIx },
    Multi { job: JobIx, operators: (OperatorIx, OperatorIx) },
    Relocate { job: JobIx, from: OperatorIx, to: OperatorIx, slot: usize },
    Swap { job: JobIx, operator: OperatorIx, other_job: JobIx, other_operator: OperatorIx },
    MissingJobSkills { operator: OperatorIx, job: JobIx, skills: Vec<String> },
    RelocateIntra { operator: OperatorIx, job: JobIx, slot: usize },
    SwapIntra { operator: OperatorIx, job: JobIx, other_job: JobIx },
    Unallocated { instrument: InstrumentIx },
    SharedInstrument { instrument: InstrumentIx, operators: (OperatorIx, OperatorIx) },
    MissingInstrumentSkills { operator: OperatorIx, instrument: InstrumentIx, skills: Vec<String> },
    Unpaired {
        job: JobIx,
        instrument: InstrumentIx,
        job_operator: Option<OperatorIx>,
        holder: Option<OperatorIx>,
    },
    Malformed { problems: Vec<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Explanation {
    pub code: Code,
    pub witness: Option<Ground>,
    pub detail: Detail,
    pub message: String,
    pub suggestion: Option<MoveSuggestion>,
    pub delta: Option<f64>,
}

/// Capped list of explanations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub explanations: Vec<Explanation>,
    pub suppressed: usize,
}

fn list(items: &[String]) -> String {
    items.join(", ")
}

fn plural(n: usize, word: &str) -> String {
    if n == 1 {
        word.to_string()
    } else {
        format!("{word}s")
    }
}

/// Fills the template for `detail`. Deltas are rounded to two decimals.
pub fn render(inst: &ProblemInstance, detail: &Detail, delta: Option<f64>) -> String {
    let op = |i: OperatorIx| inst.operators[i.0].id.as_str();
    let job = |j: JobIx| inst.jobs[j.0].id.as_str();
    let ins = |t: InstrumentIx| inst.instruments[t.0].id.as_str();
    let d = delta.unwrap_or(0.0);
    match detail {
        Detail::Unassigned { job: j } => format!("Job {} is not assigned to any operator.", job(*j)),
        Detail::Multi { job: j, operators: (a, b) } => format!(
            "Job {} is assigned to both operator {} and operator {}.",
            job(*j),
            op(*a),
            op(*b)
        ),
        Detail::Relocate { job: j, from, to, slot } => format!(
            "Moving job {} from operator {} to operator {} (position {}) reduces the maximum cost by {d:.2}.",
            job(*j),
            op(*from),
            op(*to),
            slot + 1
        ),
        Detail::Swap {
            job: j,
            operator,
            other_job,
            other_operator,
        } => format!(
            "Swapping job {} of operator {} with job {} of operator {} reduces the maximum cost by {d:.2}.",
            job(*j),
            op(*operator),
            job(*other_job),
            op(*other_operator)
        ),
        Detail::MissingJobSkills { operator, job: j, skills } => format!(
            "Operator {} lacks {} {} required by job {}.",
            op(*operator),
            plural(skills.len(), "skill"),
            list(skills),
            job(*j)
        ),
        Detail::RelocateIntra { operator, job: j, slot } => format!(
            "Moving job {} to position {} in the route of operator {} shortens the route by {d:.2}.",
            job(*j),
            slot + 1,
            op(*operator)
        ),
        Detail::SwapIntra { operator, job: j, other_job } => format!(
            "Swapping jobs {} and {} in the route of operator {} shortens the route by {d:.2}.",
            job(*j),
            job(*other_job),
            op(*operator)
        ),
        Detail::Unallocated { instrument } => {
            format!("Instrument {} is not allocated to any operator.", ins(*instrument))
        }
        Detail::SharedInstrument {
            instrument,
            operators: (a, b),
        } => format!(
            "Instrument {} is allocated to both operator {} and operator {}.",
            ins(*instrument),
            op(*a),
            op(*b)
        ),
        Detail::MissingInstrumentSkills {
            operator,
            instrument,
            skills,
        } => format!(
            "Operator {} lacks {} {} required by instrument {}.",
            op(*operator),
            plural(skills.len(), "skill"),
            list(skills),
            ins(*instrument)
        ),
        Detail::Unpaired {
            job: j,
            instrument,
            job_operator,
            holder,
        } => match (job_operator, holder) {
            (None, _) => format!(
                "Job {} requires instrument {} but is not assigned to any operator.",
                job(*j),
                ins(*instrument)
            ),
            (Some(o), None) => format!(
                "Job {} requires instrument {}, which operator {} does not hold.",
                job(*j),
                ins(*instrument),
                op(*o)
            ),
            (Some(o), Some(h)) => format!(
                "Job {} requires instrument {}, which is held by operator {} instead of operator {}.",
                job(*j),
                ins(*instrument),
                op(*h),
                op(*o)
            ),
        },
        Detail::Malformed { problems } => format!("Schedule is malformed: {}.", problems.join("; ")),
    }
}

struct Builder<'a> {
    inst: &'a ProblemInstance,
    out: Vec<Explanation>,
}

impl Builder<'_> {
    fn push(&mut self, code: Code, witness: Ground, detail: Detail, suggestion: Option<MoveSuggestion>) {
        let delta = suggestion.as_ref().map(|s| s.predicted_delta);
        let message = render(self.inst, &detail, delta);
        self.out.push(Explanation {
            code,
            witness: Some(witness),
            detail,
            message,
            suggestion,
            delta,
        });
    }
}

fn ground(af: AfKind, relation: Relation, source: Option<Argument>, target: Option<Argument>) -> Ground {
    Ground {
        af,
        relation,
        source,
        target,
    }
}

/// Keeps the largest-delta violation per key; the earliest one on ties.
fn best_per<K: Ord>(vs: Vec<ExchangeViolation>, key: impl Fn(&ExchangeViolation) -> K) -> Vec<ExchangeViolation> {
    let mut best: BTreeMap<K, ExchangeViolation> = BTreeMap::new();
    for v in vs {
        match best.entry(key(&v)) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(v);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                if crate::tolerance::gt(v.delta, e.get().delta) {
                    e.insert(v);
                }
            }
        }
    }
    best.into_values().collect()
}

fn suggestion(v: &ExchangeViolation) -> Option<MoveSuggestion> {
    Some(MoveSuggestion {
        action: v.repair.clone(),
        predicted_delta: v.delta,
    })
}

/// Every explanation for `sched`, sorted by code and then witness.
///
/// The list is empty exactly when the schedule's extensions are stable in
/// the feasibility, efficiency, individual, skill and instrument
/// frameworks and no required instrument is separated from its job.
pub fn explain(inst: &ProblemInstance, sched: &Schedule) -> Vec<Explanation> {
    let problems = sched.structural_problems(inst);
    if !problems.is_empty() {
        let detail = Detail::Malformed { problems };
        return vec![Explanation {
            code: Code::MalformedSchedule,
            witness: None,
            message: render(inst, &detail, None),
            detail,
            suggestion: None,
            delta: None,
        }];
    }

    let q = Qualifications::new(inst);
    let mut b = Builder { inst, out: Vec::new() };
    let first_op = inst.operator_ixs().next();

    // feasibility: unassigned jobs leave a(i,j) unattacked, repeated jobs
    // put attacking arguments into E
    for j in inst.job_ixs() {
        let ops = sched.operators_of(j);
        if ops.is_empty() {
            b.push(
                Code::NotFeasibleUnassigned,
                ground(AfKind::Feasibility, Relation::NonAttack, None, first_op.map(|i| Argument::Assign(i, j))),
                Detail::Unassigned { job: j },
                None,
            );
        }
        for (x, &a) in ops.iter().enumerate() {
            for &c in &ops[x + 1..] {
                b.push(
                    Code::NotFeasibleMulti,
                    ground(
                        AfKind::Feasibility,
                        Relation::Attack,
                        Some(Argument::Assign(a, j)),
                        Some(Argument::Assign(c, j)),
                    ),
                    Detail::Multi { job: j, operators: (a, c) },
                    None,
                );
            }
        }
    }

    for i in inst.operator_ixs() {
        for &j in sched.route(i) {
            if !q.job_ok[i.0][j.0] {
                let a = Argument::Assign(i, j);
                b.push(
                    Code::SkillViolation,
                    ground(AfKind::Skills, Relation::Attack, Some(a), Some(a)),
                    Detail::MissingJobSkills {
                        operator: i,
                        job: j,
                        skills: inst.missing_job_skills(i, j),
                    },
                    None,
                );
            }
        }
    }

    if let Ok(snap) = Snapshot::new(inst, sched) {
        for v in best_per(snap.sep_plus(), |v| (v.operator, v.job, v.target_operator)) {
            b.push(
                Code::NotExtendedEfficient,
                ground(
                    AfKind::Efficiency,
                    Relation::NonAttack,
                    Some(Argument::Assign(v.operator, v.job)),
                    Some(Argument::Assign(v.target_operator, v.job)),
                ),
                Detail::Relocate {
                    job: v.job,
                    from: v.operator,
                    to: v.target_operator,
                    slot: v.target_position,
                },
                suggestion(&v),
            );
        }
        for v in snap.pep_plus() {
            let other = v.target_job.expect("pairwise violations name a partner");
            b.push(
                Code::NotExtendedEfficient,
                ground(
                    AfKind::Efficiency,
                    Relation::Attack,
                    Some(Argument::Assign(v.target_operator, other)),
                    Some(Argument::Assign(v.operator, v.job)),
                ),
                Detail::Swap {
                    job: v.job,
                    operator: v.operator,
                    other_job: other,
                    other_operator: v.target_operator,
                },
                suggestion(&v),
            );
        }
        for v in best_per(snap.isep(), |v| (v.operator, v.job)) {
            let a = Argument::Assign(v.operator, v.job);
            b.push(
                Code::NotIndividuallyEfficient,
                ground(AfKind::Individual, Relation::Attack, Some(a), Some(a)),
                Detail::RelocateIntra {
                    operator: v.operator,
                    job: v.job,
                    slot: v.target_position,
                },
                suggestion(&v),
            );
        }
        for v in snap.ipep() {
            debug_assert_eq!(v.kind, ExchangeKind::Ipep);
            let other = v.target_job.expect("pairwise violations name a partner");
            b.push(
                Code::NotIndividuallyEfficient,
                ground(
                    AfKind::Individual,
                    Relation::Attack,
                    Some(Argument::Assign(v.operator, other)),
                    Some(Argument::Assign(v.operator, v.job)),
                ),
                Detail::SwapIntra {
                    operator: v.operator,
                    job: v.job,
                    other_job: other,
                },
                suggestion(&v),
            );
        }
    }

    for t in inst.instrument_ixs() {
        let holders: Vec<OperatorIx> = inst
            .operator_ixs()
            .filter(|i| sched.instruments[i.0].contains(&t))
            .collect();
        if holders.is_empty() {
            b.push(
                Code::InstrumentFeasibility,
                ground(AfKind::Instrument, Relation::NonAttack, None, first_op.map(|i| Argument::Hold(i, t))),
                Detail::Unallocated { instrument: t },
                None,
            );
        }
        for (x, &a) in holders.iter().enumerate() {
            for &c in &holders[x + 1..] {
                b.push(
                    Code::InstrumentFeasibility,
                    ground(
                        AfKind::Instrument,
                        Relation::Attack,
                        Some(Argument::Hold(a, t)),
                        Some(Argument::Hold(c, t)),
                    ),
                    Detail::SharedInstrument {
                        instrument: t,
                        operators: (a, c),
                    },
                    None,
                );
            }
            if !q.holds_ok[a.0][t.0] {
                let arg = Argument::Hold(a, t);
                b.push(
                    Code::InstrumentSkillViolation,
                    ground(AfKind::Instrument, Relation::Attack, Some(arg), Some(arg)),
                    Detail::MissingInstrumentSkills {
                        operator: a,
                        instrument: t,
                        skills: inst.missing_instrument_skills(a, t),
                    },
                    None,
                );
            }
        }
    }

    let assignment = sched.assignment(inst.num_jobs());
    for j in inst.job_ixs() {
        for &t in &q.job_instruments[j.0] {
            let holders: Vec<OperatorIx> = inst
                .operator_ixs()
                .filter(|i| sched.instruments[i.0].contains(&t))
                .collect();
            let job_operator = assignment[j.0];
            let paired = job_operator.is_some_and(|o| !holders.is_empty() && holders.iter().all(|&h| h == o));
            if !paired {
                let a = Argument::Require(j, t);
                b.push(
                    Code::JobInstrumentViolation,
                    ground(AfKind::JobInstrument, Relation::Attack, Some(a), Some(a)),
                    Detail::Unpaired {
                        job: j,
                        instrument: t,
                        job_operator,
                        holder: holders.into_iter().find(|&h| Some(h) != job_operator),
                    },
                    None,
                );
            }
        }
    }

    let mut out = b.out;
    out.sort_by_key(|x| (x.code, x.witness));
    out
}

/// [`explain`] truncated to `cap` entries.
pub fn explain_capped(inst: &ProblemInstance, sched: &Schedule, cap: usize) -> Report {
    let mut explanations = explain(inst, sched);
    let suppressed = explanations.len().saturating_sub(cap);
    explanations.truncate(cap);
    Report {
        explanations,
        suppressed,
    }
}

/// Whether every framework accepts the schedule; an independent route to
/// the same answer as `explain(..).is_empty()`.
pub fn all_stable(inst: &ProblemInstance, sched: &Schedule) -> bool {
    if !sched.structural_problems(inst).is_empty() {
        return false;
    }
    let stable = |kind: AfKind| {
        let g = builders::build(kind, inst, sched);
        let e = builders::extension(kind, inst, sched);
        g.is_stable(&e).map(|v| v.holds()).unwrap_or(false)
    };
    let ji = builders::job_instrument_af(inst, sched);
    let zeta = builders::requirement_extension(inst);
    [
        AfKind::Feasibility,
        AfKind::Efficiency,
        AfKind::Individual,
        AfKind::Skills,
        AfKind::Instrument,
    ]
    .into_iter()
    .all(stable)
        && !ji.self_attacking().any(|a| zeta.contains(a))
}
