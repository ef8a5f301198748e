//! JSON formats.
//!
//! Problem files:
//!
//! ```json
//! {"alpha": 0.5, "beta": 0.5, "depot": [0, 0], "skills": ["A"],
//!  "operators": [{"id": "O1", "skills": ["A"]}],
//!  "instruments": [{"id": "I1", "skills": []}],
//!  "jobs": [{"id": "J1", "x": 3, "y": 4, "skills": [], "instruments": ["I1"]}],
//!  "processing": [[3]]}
//! ```
//!
//! Schedule files map operator ids to job and instrument ids:
//! `{"routes": {"O1": ["J1"]}, "instruments": {"O1": ["I1"]}}`.
//!
//! Emission is canonical: keys sorted, every real number written with six
//! decimals, arrays of scalars kept on one line.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::af::{ArgGraph, Argument};
use crate::cost::CostReport;
use crate::error::Blocker;
use crate::explain::{Explanation, Report};
use crate::model::{
    validate_instance, InstrumentIx, InstrumentSpec, JobIx, JobSpec, OperatorIx, OperatorSpec, Point,
    ProblemInstance, Schedule,
};
use crate::moves::{Move, MoveKind, MoveSuggestion};
use crate::solver::TraceStep;

/// A located format problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// JSON path such as `$.jobs[1].instruments`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}", .diagnostics.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
pub struct FormatError {
    pub diagnostics: Vec<Diagnostic>,
}

impl FormatError {
    fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            diagnostics: vec![Diagnostic {
                path: path.into(),
                message: message.into(),
            }],
        }
    }
}

impl From<FormatError> for crate::Error {
    fn from(e: FormatError) -> Self {
        crate::Error::Input(e.to_string())
    }
}

fn half() -> f64 {
    0.5
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemDoc {
    #[serde(default = "half")]
    alpha: f64,
    #[serde(default = "half")]
    beta: f64,
    #[serde(default)]
    depot: [f64; 2],
    #[serde(default)]
    skills: Vec<String>,
    operators: Vec<OperatorDoc>,
    #[serde(default)]
    instruments: Vec<InstrumentDoc>,
    jobs: Vec<JobDoc>,
    processing: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorDoc {
    id: String,
    #[serde(default)]
    skills: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstrumentDoc {
    id: String,
    #[serde(default)]
    skills: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JobDoc {
    id: String,
    x: f64,
    y: f64,
    #[serde(default)]
    skills: Vec<String>,
    #[serde(default)]
    instruments: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleDoc {
    #[serde(default)]
    routes: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    instruments: BTreeMap<String, Vec<String>>,
}

fn from_json<T: serde::de::DeserializeOwned>(value: Value) -> Result<T, FormatError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "$".to_string() } else { format!("$.{path}") };
        FormatError::at(path, e.into_inner().to_string())
    })
}

fn read(text: &str) -> Result<Value, FormatError> {
    serde_json::from_str(text).map_err(|e| FormatError::at("$", format!("not valid JSON: {e}")))
}

fn set(items: Vec<String>) -> BTreeSet<String> {
    items.into_iter().collect()
}

/// Parses and validates a problem file.
pub fn parse_problem(text: &str) -> Result<ProblemInstance, FormatError> {
    problem_from_value(read(text)?)
}

pub fn problem_from_value(value: Value) -> Result<ProblemInstance, FormatError> {
    let doc: ProblemDoc = from_json(value)?;
    let inst = ProblemInstance {
        operators: doc
            .operators
            .into_iter()
            .map(|o| OperatorSpec {
                id: o.id,
                skills: set(o.skills),
            })
            .collect(),
        jobs: doc
            .jobs
            .into_iter()
            .map(|j| JobSpec {
                id: j.id,
                location: Point::new(j.x, j.y),
                required_skills: set(j.skills),
                required_instruments: set(j.instruments),
            })
            .collect(),
        instruments: doc
            .instruments
            .into_iter()
            .map(|t| InstrumentSpec {
                id: t.id,
                required_skills: set(t.skills),
            })
            .collect(),
        skills: set(doc.skills),
        processing: doc.processing,
        alpha: doc.alpha,
        beta: doc.beta,
        depot: Point::new(doc.depot[0], doc.depot[1]),
    };
    let errors = validate_instance(&inst);
    if errors.is_empty() {
        Ok(inst)
    } else {
        Err(FormatError {
            diagnostics: errors
                .into_iter()
                .map(|e| Diagnostic {
                    path: e.path,
                    message: e.message,
                })
                .collect(),
        })
    }
}

/// Parses a schedule against `inst`. Unknown ids are rejected; operators
/// missing from the file get an empty route and no instruments.
pub fn parse_schedule(inst: &ProblemInstance, text: &str) -> Result<Schedule, FormatError> {
    schedule_from_value(inst, read(text)?)
}

pub fn schedule_from_value(inst: &ProblemInstance, value: Value) -> Result<Schedule, FormatError> {
    let doc: ScheduleDoc = from_json(value)?;
    let mut diagnostics = Vec::new();
    let mut s = Schedule::empty(inst.num_operators());
    for (op_id, jobs) in &doc.routes {
        let Some(i) = inst.operator_by_id(op_id) else {
            diagnostics.push(Diagnostic {
                path: format!("$.routes.{op_id}"),
                message: format!("unknown operator {op_id:?}"),
            });
            continue;
        };
        for (k, id) in jobs.iter().enumerate() {
            match inst.job_by_id(id) {
                Some(j) => s.routes[i.0].push(j),
                None => diagnostics.push(Diagnostic {
                    path: format!("$.routes.{op_id}[{k}]"),
                    message: format!("unknown job {id:?}"),
                }),
            }
        }
    }
    for (op_id, insts) in &doc.instruments {
        let Some(i) = inst.operator_by_id(op_id) else {
            diagnostics.push(Diagnostic {
                path: format!("$.instruments.{op_id}"),
                message: format!("unknown operator {op_id:?}"),
            });
            continue;
        };
        for (k, id) in insts.iter().enumerate() {
            match inst.instrument_by_id(id) {
                Some(t) => {
                    s.instruments[i.0].insert(t);
                }
                None => diagnostics.push(Diagnostic {
                    path: format!("$.instruments.{op_id}[{k}]"),
                    message: format!("unknown instrument {id:?}"),
                }),
            }
        }
    }
    if diagnostics.is_empty() {
        Ok(s)
    } else {
        Err(FormatError { diagnostics })
    }
}

fn ids<'a>(items: impl IntoIterator<Item = &'a String>) -> Value {
    Value::Array(items.into_iter().map(|s| Value::String(s.clone())).collect())
}

pub fn problem_to_value(inst: &ProblemInstance) -> Value {
    json!({
        "alpha": inst.alpha,
        "beta": inst.beta,
        "depot": [inst.depot.x, inst.depot.y],
        "skills": ids(&inst.skills),
        "operators": inst.operators.iter().map(|o| json!({"id": o.id, "skills": ids(&o.skills)})).collect::<Vec<_>>(),
        "instruments": inst.instruments.iter().map(|t| json!({"id": t.id, "skills": ids(&t.required_skills)})).collect::<Vec<_>>(),
        "jobs": inst.jobs.iter().map(|j| json!({
            "id": j.id,
            "x": j.location.x,
            "y": j.location.y,
            "skills": ids(&j.required_skills),
            "instruments": ids(&j.required_instruments),
        })).collect::<Vec<_>>(),
        "processing": inst.processing,
    })
}

pub fn schedule_to_value(inst: &ProblemInstance, sched: &Schedule) -> Value {
    let mut routes = Map::new();
    let mut instruments = Map::new();
    for i in inst.operator_ixs() {
        let id = inst.operators[i.0].id.clone();
        let jobs = sched.routes.get(i.0).map(Vec::as_slice).unwrap_or_default();
        routes.insert(id.clone(), jobs.iter().map(|&j| job_id(inst, j)).collect());
        let held = sched.instruments.get(i.0).cloned().unwrap_or_default();
        instruments.insert(id, held.iter().map(|&t| instrument_id(inst, t)).collect());
    }
    json!({"routes": routes, "instruments": instruments})
}

pub fn emit_problem(inst: &ProblemInstance) -> String {
    to_canonical(&problem_to_value(inst), Style::Pretty)
}

pub fn emit_schedule(inst: &ProblemInstance, sched: &Schedule) -> String {
    to_canonical(&schedule_to_value(inst, sched), Style::Pretty)
}

fn op_id(inst: &ProblemInstance, i: OperatorIx) -> Value {
    Value::String(inst.operators[i.0].id.clone())
}

fn job_id(inst: &ProblemInstance, j: JobIx) -> Value {
    Value::String(inst.jobs[j.0].id.clone())
}

fn instrument_id(inst: &ProblemInstance, t: InstrumentIx) -> Value {
    Value::String(inst.instruments[t.0].id.clone())
}

fn instrument_ids(inst: &ProblemInstance, ts: &[InstrumentIx]) -> Value {
    Value::Array(ts.iter().map(|&t| instrument_id(inst, t)).collect())
}

pub fn move_to_value(inst: &ProblemInstance, mv: &Move) -> Value {
    let kind = mv.kind().as_str();
    match mv {
        Move::RelocateInter {
            job,
            from,
            to,
            slot,
            instruments,
        } => json!({
            "kind": kind,
            "job": job_id(inst, *job),
            "from": op_id(inst, *from),
            "to": op_id(inst, *to),
            "position": slot + 1,
            "instruments": instrument_ids(inst, instruments),
        }),
        Move::SwapInter {
            job,
            operator,
            other_job,
            other_operator,
            instruments,
            other_instruments,
        } => json!({
            "kind": kind,
            "job": job_id(inst, *job),
            "operator": op_id(inst, *operator),
            "other_job": job_id(inst, *other_job),
            "other_operator": op_id(inst, *other_operator),
            "instruments": instrument_ids(inst, instruments),
            "other_instruments": instrument_ids(inst, other_instruments),
        }),
        Move::RelocateIntra { operator, job, slot } => json!({
            "kind": kind,
            "operator": op_id(inst, *operator),
            "job": job_id(inst, *job),
            "position": slot + 1,
        }),
        Move::SwapIntra {
            operator,
            job,
            other_job,
        } => json!({
            "kind": kind,
            "operator": op_id(inst, *operator),
            "job": job_id(inst, *job),
            "other_job": job_id(inst, *other_job),
        }),
        Move::MoveInstrument { instrument, from, to } => json!({
            "kind": kind,
            "instrument": instrument_id(inst, *instrument),
            "from": from.map_or(Value::Null, |f| op_id(inst, f)),
            "to": op_id(inst, *to),
        }),
    }
}

pub fn suggestion_to_value(inst: &ProblemInstance, s: &MoveSuggestion) -> Value {
    let mut v = move_to_value(inst, &s.action);
    v["predicted_delta"] = json!(s.predicted_delta);
    v
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MoveDoc {
    kind: String,
    job: Option<String>,
    from: Option<String>,
    to: Option<String>,
    position: Option<usize>,
    instruments: Option<Vec<String>>,
    operator: Option<String>,
    other_job: Option<String>,
    other_operator: Option<String>,
    other_instruments: Option<Vec<String>>,
    instrument: Option<String>,
    #[allow(dead_code)]
    predicted_delta: Option<f64>,
}

/// Reads a move in the shape produced by [`move_to_value`].
/// `predicted_delta` is accepted and ignored.
pub fn move_from_value(inst: &ProblemInstance, value: Value) -> Result<Move, FormatError> {
    let doc: MoveDoc = from_json(value)?;
    let kind = MoveKind::parse(&doc.kind).ok_or_else(|| FormatError::at("$.kind", format!("unknown move kind {:?}", doc.kind)))?;
    fn need<'a>(field: &'a Option<String>, name: &str) -> Result<&'a str, FormatError> {
        field
            .as_deref()
            .ok_or_else(|| FormatError::at(format!("$.{name}"), format!("missing field `{name}`")))
    }
    let op = |field: &Option<String>, name: &str| -> Result<OperatorIx, FormatError> {
        let id = need(field, name)?;
        inst.operator_by_id(id)
            .ok_or_else(|| FormatError::at(format!("$.{name}"), format!("unknown operator {id:?}")))
    };
    let job = |field: &Option<String>, name: &str| -> Result<JobIx, FormatError> {
        let id = need(field, name)?;
        inst.job_by_id(id)
            .ok_or_else(|| FormatError::at(format!("$.{name}"), format!("unknown job {id:?}")))
    };
    let tools = |field: &Option<Vec<String>>, name: &str| -> Result<Vec<InstrumentIx>, FormatError> {
        field
            .iter()
            .flatten()
            .enumerate()
            .map(|(k, id)| {
                inst.instrument_by_id(id)
                    .ok_or_else(|| FormatError::at(format!("$.{name}[{k}]"), format!("unknown instrument {id:?}")))
            })
            .collect()
    };
    let slot = || match doc.position {
        Some(p) if p >= 1 => Ok(p - 1),
        Some(_) => Err(FormatError::at("$.position", "positions start at 1")),
        None => Err(FormatError::at("$.position", "missing field `position`")),
    };
    Ok(match kind {
        MoveKind::RelocateInter => Move::RelocateInter {
            job: job(&doc.job, "job")?,
            from: op(&doc.from, "from")?,
            to: op(&doc.to, "to")?,
            slot: slot()?,
            instruments: tools(&doc.instruments, "instruments")?,
        },
        MoveKind::SwapInter => Move::SwapInter {
            job: job(&doc.job, "job")?,
            operator: op(&doc.operator, "operator")?,
            other_job: job(&doc.other_job, "other_job")?,
            other_operator: op(&doc.other_operator, "other_operator")?,
            instruments: tools(&doc.instruments, "instruments")?,
            other_instruments: tools(&doc.other_instruments, "other_instruments")?,
        },
        MoveKind::RelocateIntra => Move::RelocateIntra {
            operator: op(&doc.operator, "operator")?,
            job: job(&doc.job, "job")?,
            slot: slot()?,
        },
        MoveKind::SwapIntra => Move::SwapIntra {
            operator: op(&doc.operator, "operator")?,
            job: job(&doc.job, "job")?,
            other_job: job(&doc.other_job, "other_job")?,
        },
        MoveKind::MoveInstrument => {
            let id = need(&doc.instrument, "instrument")?;
            Move::MoveInstrument {
                instrument: inst
                    .instrument_by_id(id)
                    .ok_or_else(|| FormatError::at("$.instrument", format!("unknown instrument {id:?}")))?,
                from: match &doc.from {
                    Some(_) => Some(op(&doc.from, "from")?),
                    None => None,
                },
                to: op(&doc.to, "to")?,
            }
        }
    })
}

fn argument_label(inst: &ProblemInstance, a: Option<Argument>) -> Value {
    a.map_or(Value::Null, |a| Value::String(a.label(inst)))
}

pub fn explanation_to_value(inst: &ProblemInstance, e: &Explanation) -> Value {
    json!({
        "code": e.code.as_str(),
        "witness": e.witness.map_or(Value::Null, |w| json!({
            "af": w.af.as_str(),
            "relation": w.relation.as_str(),
            "source": argument_label(inst, w.source),
            "target": argument_label(inst, w.target),
        })),
        "message": e.message,
        "suggestion": e.suggestion.as_ref().map_or(Value::Null, |s| suggestion_to_value(inst, s)),
        "delta": e.delta.map_or(Value::Null, |d| json!(d)),
    })
}

pub fn report_to_value(inst: &ProblemInstance, r: &Report) -> Value {
    json!({
        "explanations": r.explanations.iter().map(|e| explanation_to_value(inst, e)).collect::<Vec<_>>(),
        "suppressed": r.suppressed,
    })
}

pub fn cost_report_to_value(inst: &ProblemInstance, r: &CostReport) -> Value {
    json!({
        "per_operator": r.per_operator.iter().map(|&(i, c)| json!({
            "operator": op_id(inst, i),
            "cost": c,
            "distance": r.distances[i.0],
        })).collect::<Vec<_>>(),
        "makespan": r.makespan,
        "critical_operators": r.critical_operators.iter().map(|&i| op_id(inst, i)).collect::<Vec<_>>(),
    })
}

pub fn af_to_value(inst: &ProblemInstance, g: &ArgGraph<Argument>, ext: &BTreeSet<Argument>) -> Value {
    json!({
        "arguments": g.args().iter().map(|a| a.label(inst)).collect::<Vec<_>>(),
        "extension": ext.iter().map(|a| a.label(inst)).collect::<Vec<_>>(),
        "attacks": g.attack_pairs().map(|(a, b)| json!([a.label(inst), b.label(inst)])).collect::<Vec<_>>(),
    })
}

/// Blocking (job, skill) and (job, instrument) pairs with entity ids.
pub fn blockers_to_value(inst: &ProblemInstance, blockers: &[Blocker]) -> Value {
    Value::Array(
        blockers
            .iter()
            .map(|b| match b {
                Blocker::Skill { job, skill } => json!({"job": job_id(inst, *job), "skill": skill}),
                Blocker::Instrument { job, instrument } => json!({
                    "job": job.map_or(Value::Null, |j| job_id(inst, j)),
                    "instrument": instrument_id(inst, *instrument),
                }),
            })
            .collect(),
    )
}

pub fn trace_to_value(inst: &ProblemInstance, trace: &[TraceStep]) -> Value {
    Value::Array(
        trace
            .iter()
            .map(|s| {
                json!({
                    "move": move_to_value(inst, &s.action),
                    "makespan": s.makespan,
                    "total_distance": s.total_distance,
                })
            })
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    /// Two-space indentation; arrays of scalars on one line.
    Pretty,
    /// No whitespace at all.
    Compact,
}

/// Canonical text for `v`: sorted keys, reals with six decimals and a
/// trailing newline in pretty style.
pub fn to_canonical(v: &Value, style: Style) -> String {
    let mut out = String::new();
    write_value(&mut out, v, style, 0);
    if style == Style::Pretty {
        out.push('\n');
    }
    out
}

fn write_scalar(out: &mut String, v: &Value) {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64().filter(|_| !n.is_f64()) {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64().filter(|_| !n.is_f64()) {
                let _ = write!(out, "{u}");
            } else {
                let f = n.as_f64().unwrap_or(0.0);
                let text = format!("{f:.6}");
                // -0.000000 and friends
                if text.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
                    out.push_str(text.trim_start_matches('-'));
                } else {
                    out.push_str(&text);
                }
            }
        }
        other => out.push_str(&other.to_string()),
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write_value(out: &mut String, v: &Value, style: Style, level: usize) {
    let pretty = style == Style::Pretty;
    match v {
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Array(items) if !pretty || items.iter().all(is_scalar) => {
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                    if pretty {
                        out.push(' ');
                    }
                }
                write_value(out, item, style, level);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                indent(out, level + 1);
                write_value(out, item, style, level + 1);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            indent(out, level);
            out.push(']');
        }
        Value::Object(map) => {
            // serde_json's default map is ordered by key
            out.push('{');
            if pretty {
                out.push('\n');
            }
            for (k, (key, item)) in map.iter().enumerate() {
                if pretty {
                    indent(out, level + 1);
                }
                out.push_str(&Value::String(key.clone()).to_string());
                out.push(':');
                if pretty {
                    out.push(' ');
                }
                write_value(out, item, style, level + 1);
                if k + 1 < map.len() {
                    out.push(',');
                }
                if pretty {
                    out.push('\n');
                }
            }
            if pretty {
                indent(out, level);
            }
            out.push('}');
        }
        scalar => write_scalar(out, scalar),
    }
}
