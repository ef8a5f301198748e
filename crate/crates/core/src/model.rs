//! Problem and solution data model.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

/// A location in the Euclidean plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Euclidean distance.
#[inline]
pub fn distance(a: Point, b: Point) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

macro_rules! index_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub usize);

        impl $name {
            #[inline]
            pub fn get(self) -> usize {
                self.0
            }
        }

        impl From<usize> for $name {
            fn from(v: usize) -> Self {
                Self(v)
            }
        }
    };
}

index_type!(
    /// Position of an operator in [`ProblemInstance::operators`].
    OperatorIx
);
index_type!(
    /// Position of a job in [`ProblemInstance::jobs`].
    JobIx
);
index_type!(
    /// Position of an instrument in [`ProblemInstance::instruments`].
    InstrumentIx
);

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    pub id: String,
    pub skills: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobSpec {
    pub id: String,
    pub location: Point,
    pub required_skills: BTreeSet<String>,
    pub required_instruments: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstrumentSpec {
    pub id: String,
    pub required_skills: BTreeSet<String>,
}

/// Operators, jobs and instruments plus the cost parameters.
///
/// `processing[i][j]` is the time operator `i` needs for job `j`. The
/// objective weights satisfy `alpha + beta = 1`; every operator starts and
/// ends its route at `depot`. Use [`validate_instance`] before handing an
/// instance built by hand to the rest of the crate.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub operators: Vec<OperatorSpec>,
    pub jobs: Vec<JobSpec>,
    pub instruments: Vec<InstrumentSpec>,
    pub skills: BTreeSet<String>,
    pub processing: Vec<Vec<f64>>,
    pub alpha: f64,
    pub beta: f64,
    pub depot: Point,
}

impl ProblemInstance {
    pub fn num_operators(&self) -> usize {
        self.operators.len()
    }

    pub fn num_jobs(&self) -> usize {
        self.jobs.len()
    }

    pub fn num_instruments(&self) -> usize {
        self.instruments.len()
    }

    pub fn operator_ixs(&self) -> impl Iterator<Item = OperatorIx> + Clone {
        (0..self.operators.len()).map(OperatorIx)
    }

    pub fn job_ixs(&self) -> impl Iterator<Item = JobIx> + Clone {
        (0..self.jobs.len()).map(JobIx)
    }

    pub fn instrument_ixs(&self) -> impl Iterator<Item = InstrumentIx> + Clone {
        (0..self.instruments.len()).map(InstrumentIx)
    }

    #[inline]
    pub fn processing_time(&self, op: OperatorIx, job: JobIx) -> f64 {
        self.processing[op.0][job.0]
    }

    #[inline]
    pub fn location(&self, job: JobIx) -> Point {
        self.jobs[job.0].location
    }

    pub fn operator(&self, op: OperatorIx) -> &OperatorSpec {
        &self.operators[op.0]
    }

    pub fn job(&self, job: JobIx) -> &JobSpec {
        &self.jobs[job.0]
    }

    pub fn instrument(&self, inst: InstrumentIx) -> &InstrumentSpec {
        &self.instruments[inst.0]
    }

    pub fn operator_by_id(&self, id: &str) -> Option<OperatorIx> {
        self.operators.iter().position(|o| o.id == id).map(OperatorIx)
    }

    pub fn job_by_id(&self, id: &str) -> Option<JobIx> {
        self.jobs.iter().position(|j| j.id == id).map(JobIx)
    }

    pub fn instrument_by_id(&self, id: &str) -> Option<InstrumentIx> {
        self.instruments.iter().position(|t| t.id == id).map(InstrumentIx)
    }

    /// Instruments required by `job`, in instrument order. Unknown ids are
    /// skipped (they are reported by [`validate_instance`]).
    pub fn job_instruments(&self, job: JobIx) -> Vec<InstrumentIx> {
        let required = &self.jobs[job.0].required_instruments;
        self.instrument_ixs()
            .filter(|t| required.contains(&self.instruments[t.0].id))
            .collect()
    }

    /// Skills of `job` the operator lacks.
    pub fn missing_job_skills(&self, op: OperatorIx, job: JobIx) -> Vec<String> {
        let have = &self.operators[op.0].skills;
        self.jobs[job.0]
            .required_skills
            .difference(have)
            .cloned()
            .collect()
    }

    /// Skills of `inst` the operator lacks.
    pub fn missing_instrument_skills(&self, op: OperatorIx, inst: InstrumentIx) -> Vec<String> {
        let have = &self.operators[op.0].skills;
        self.instruments[inst.0]
            .required_skills
            .difference(have)
            .cloned()
            .collect()
    }

    /// The job–instrument constraint matrix, `zeta[j][t]`.
    pub fn requirement_matrix(&self) -> Vec<Vec<bool>> {
        self.job_ixs()
            .map(|j| {
                let req = &self.jobs[j.0].required_instruments;
                self.instruments.iter().map(|t| req.contains(&t.id)).collect()
            })
            .collect()
    }
}

/// Precomputed qualification tables for hot loops.
#[derive(Debug, Clone)]
pub struct Qualifications {
    /// `job_ok[i][j]`: operator `i` has every skill job `j` needs.
    pub job_ok: Vec<Vec<bool>>,
    /// `holds_ok[i][t]`: operator `i` has every skill instrument `t` needs.
    pub holds_ok: Vec<Vec<bool>>,
    pub job_instruments: Vec<Vec<InstrumentIx>>,
    pub instrument_jobs: Vec<Vec<JobIx>>,
}

impl Qualifications {
    pub fn new(inst: &ProblemInstance) -> Self {
        let job_ok = inst
            .operator_ixs()
            .map(|i| {
                let have = &inst.operators[i.0].skills;
                inst.jobs
                    .iter()
                    .map(|j| j.required_skills.is_subset(have))
                    .collect()
            })
            .collect();
        let holds_ok = inst
            .operator_ixs()
            .map(|i| {
                let have = &inst.operators[i.0].skills;
                inst.instruments
                    .iter()
                    .map(|t| t.required_skills.is_subset(have))
                    .collect()
            })
            .collect();
        let job_instruments: Vec<Vec<InstrumentIx>> =
            inst.job_ixs().map(|j| inst.job_instruments(j)).collect();
        let mut instrument_jobs = vec![Vec::new(); inst.num_instruments()];
        for (j, insts) in job_instruments.iter().enumerate() {
            for t in insts {
                instrument_jobs[t.0].push(JobIx(j));
            }
        }
        Self {
            job_ok,
            holds_ok,
            job_instruments,
            instrument_jobs,
        }
    }

    /// Operator may take the job and hold every instrument it requires.
    pub fn can_serve(&self, op: OperatorIx, job: JobIx) -> bool {
        self.job_ok[op.0][job.0]
            && self.job_instruments[job.0]
                .iter()
                .all(|t| self.holds_ok[op.0][t.0])
    }
}

/// Jobs linked by shared instrument requirements must be served by one
/// operator. Returns, per job, the id of its group and the group list.
pub fn instrument_groups(inst: &ProblemInstance, quals: &Qualifications) -> (Vec<usize>, Vec<Vec<JobIx>>) {
    let n = inst.num_jobs();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for jobs in &quals.instrument_jobs {
        for w in jobs.windows(2) {
            let (a, b) = (find(&mut parent, w[0].0), find(&mut parent, w[1].0));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut group_of = vec![usize::MAX; n];
    let mut groups: Vec<Vec<JobIx>> = Vec::new();
    let mut root_group: BTreeMap<usize, usize> = BTreeMap::new();
    for (j, slot) in group_of.iter_mut().enumerate() {
        let root = find(&mut parent, j);
        let g = *root_group.entry(root).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        *slot = g;
        groups[g].push(JobIx(j));
    }
    (group_of, groups)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceErrorKind {
    WeightSum,
    NegativeWeight,
    Dimension,
    NegativeProcessing,
    NonFinite,
    DuplicateId,
    UnknownSkill,
    UnknownInstrument,
}

/// One violated instance invariant, located by a JSON path into the
/// problem file format.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceError {
    pub kind: InstanceErrorKind,
    pub path: String,
    pub message: String,
}

impl fmt::Display for InstanceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

pub fn validate_instance(inst: &ProblemInstance) -> Vec<InstanceError> {
    let mut errors = Vec::new();
    let mut push = |kind, path: String, message: String| {
        errors.push(InstanceError {
            kind,
            path,
            message,
        })
    };

    for (name, v) in [("alpha", inst.alpha), ("beta", inst.beta)] {
        if !v.is_finite() {
            push(InstanceErrorKind::NonFinite, format!("$.{name}"), format!("{name} is not finite"));
        } else if v < 0.0 {
            push(InstanceErrorKind::NegativeWeight, format!("$.{name}"), format!("{name} = {v} is negative"));
        }
    }
    if inst.alpha.is_finite() && inst.beta.is_finite() && (inst.alpha + inst.beta - 1.0).abs() > 1e-12 {
        push(
            InstanceErrorKind::WeightSum,
            "$.alpha".into(),
            format!("alpha + beta = {} (must be 1)", inst.alpha + inst.beta),
        );
    }
    if !inst.depot.x.is_finite() || !inst.depot.y.is_finite() {
        push(InstanceErrorKind::NonFinite, "$.depot".into(), "depot is not finite".into());
    }

    let mut check_ids = |section: &str, ids: Vec<&str>| {
        let mut seen = BTreeSet::new();
        for (k, id) in ids.into_iter().enumerate() {
            if !seen.insert(id) {
                push(
                    InstanceErrorKind::DuplicateId,
                    format!("$.{section}[{k}].id"),
                    format!("duplicate id {id:?}"),
                );
            }
        }
    };
    check_ids("operators", inst.operators.iter().map(|o| o.id.as_str()).collect());
    check_ids("jobs", inst.jobs.iter().map(|j| j.id.as_str()).collect());
    check_ids("instruments", inst.instruments.iter().map(|t| t.id.as_str()).collect());

    let mut check_skills = |path: String, skills: &BTreeSet<String>| {
        for s in skills {
            if !inst.skills.contains(s) {
                push(
                    InstanceErrorKind::UnknownSkill,
                    path.clone(),
                    format!("unknown skill {s:?}"),
                );
            }
        }
    };
    for (k, o) in inst.operators.iter().enumerate() {
        check_skills(format!("$.operators[{k}].skills"), &o.skills);
    }
    for (k, t) in inst.instruments.iter().enumerate() {
        check_skills(format!("$.instruments[{k}].skills"), &t.required_skills);
    }
    for (k, j) in inst.jobs.iter().enumerate() {
        check_skills(format!("$.jobs[{k}].skills"), &j.required_skills);
    }

    let known: BTreeSet<&str> = inst.instruments.iter().map(|t| t.id.as_str()).collect();
    for (k, j) in inst.jobs.iter().enumerate() {
        if !j.location.x.is_finite() || !j.location.y.is_finite() {
            errors.push(InstanceError {
                kind: InstanceErrorKind::NonFinite,
                path: format!("$.jobs[{k}]"),
                message: "location is not finite".into(),
            });
        }
        for t in &j.required_instruments {
            if !known.contains(t.as_str()) {
                errors.push(InstanceError {
                    kind: InstanceErrorKind::UnknownInstrument,
                    path: format!("$.jobs[{k}].instruments"),
                    message: format!("unknown instrument {t:?}"),
                });
            }
        }
    }

    let (m, n) = (inst.num_operators(), inst.num_jobs());
    if inst.processing.len() != m {
        errors.push(InstanceError {
            kind: InstanceErrorKind::Dimension,
            path: "$.processing".into(),
            message: format!("expected {m} rows (one per operator), found {}", inst.processing.len()),
        });
    }
    for (i, row) in inst.processing.iter().enumerate() {
        if row.len() != n {
            errors.push(InstanceError {
                kind: InstanceErrorKind::Dimension,
                path: format!("$.processing[{i}]"),
                message: format!("expected {n} columns (one per job), found {}", row.len()),
            });
        }
        for (j, &p) in row.iter().enumerate() {
            if !p.is_finite() {
                errors.push(InstanceError {
                    kind: InstanceErrorKind::NonFinite,
                    path: format!("$.processing[{i}][{j}]"),
                    message: "processing time is not finite".into(),
                });
            } else if p < 0.0 {
                errors.push(InstanceError {
                    kind: InstanceErrorKind::NegativeProcessing,
                    path: format!("$.processing[{i}][{j}]"),
                    message: format!("processing time {p} is negative"),
                });
            }
        }
    }
    errors
}

/// Per-operator job sequences plus per-operator instrument sets.
///
/// Assignment variables are implicit: job `j` at index `k` of `routes[i]`
/// means operator `i` does `j` as its `(k+1)`-th job; consecutive entries
/// give the travel legs and the last entry of a non-empty route is the job
/// after which the operator returns to the depot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Schedule {
    pub routes: Vec<Vec<JobIx>>,
    pub instruments: Vec<BTreeSet<InstrumentIx>>,
}

impl Schedule {
    /// All routes empty and no instruments allocated.
    pub fn empty(num_operators: usize) -> Self {
        Self {
            routes: vec![Vec::new(); num_operators],
            instruments: vec![BTreeSet::new(); num_operators],
        }
    }

    pub fn from_routes(routes: Vec<Vec<JobIx>>) -> Self {
        let m = routes.len();
        Self {
            routes,
            instruments: vec![BTreeSet::new(); m],
        }
    }

    pub fn with_instruments(mut self, alloc: Vec<BTreeSet<InstrumentIx>>) -> Self {
        self.instruments = alloc;
        self
    }

    pub fn route(&self, op: OperatorIx) -> &[JobIx] {
        &self.routes[op.0]
    }

    /// Operators whose route contains `job`.
    pub fn operators_of(&self, job: JobIx) -> Vec<OperatorIx> {
        self.routes
            .iter()
            .enumerate()
            .filter(|(_, r)| r.contains(&job))
            .map(|(i, _)| OperatorIx(i))
            .collect()
    }

    /// First operator serving each job (`None` when unassigned).
    pub fn assignment(&self, num_jobs: usize) -> Vec<Option<OperatorIx>> {
        let mut out = vec![None; num_jobs];
        for (i, r) in self.routes.iter().enumerate() {
            for j in r {
                if j.0 < num_jobs && out[j.0].is_none() {
                    out[j.0] = Some(OperatorIx(i));
                }
            }
        }
        out
    }

    /// First operator holding each instrument.
    pub fn holders(&self, num_instruments: usize) -> Vec<Option<OperatorIx>> {
        let mut out = vec![None; num_instruments];
        for (i, set) in self.instruments.iter().enumerate() {
            for t in set {
                if t.0 < num_instruments && out[t.0].is_none() {
                    out[t.0] = Some(OperatorIx(i));
                }
            }
        }
        out
    }

    /// Position of `job` within the route of `op`.
    pub fn position(&self, op: OperatorIx, job: JobIx) -> Option<usize> {
        self.routes.get(op.0)?.iter().position(|&j| j == job)
    }

    /// Consecutive job pairs of a route (the travel legs between jobs).
    pub fn consecutive_pairs(&self, op: OperatorIx) -> impl Iterator<Item = (JobIx, JobIx)> + '_ {
        self.routes[op.0].windows(2).map(|w| (w[0], w[1]))
    }

    /// The job each non-empty route ends with.
    pub fn last_jobs(&self) -> Vec<(OperatorIx, JobIx)> {
        self.routes
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.last().map(|&j| (OperatorIx(i), j)))
            .collect()
    }

    /// Every job appears in exactly one route.
    pub fn is_feasible(&self, num_jobs: usize) -> bool {
        let mut count = vec![0usize; num_jobs];
        for r in &self.routes {
            for j in r {
                match count.get_mut(j.0) {
                    Some(c) => *c += 1,
                    None => return false,
                }
            }
        }
        count.iter().all(|&c| c == 1)
    }

    /// Shape problems that make the schedule unusable for any check:
    /// wrong operator count, out-of-range indices, or a job repeated within
    /// one route.
    pub fn structural_problems(&self, inst: &ProblemInstance) -> Vec<String> {
        let mut out = Vec::new();
        let m = inst.num_operators();
        if self.routes.len() != m {
            out.push(format!("expected {m} routes, found {}", self.routes.len()));
        }
        if self.instruments.len() != m {
            out.push(format!(
                "expected {m} instrument sets, found {}",
                self.instruments.len()
            ));
        }
        for (i, r) in self.routes.iter().enumerate() {
            let mut seen = BTreeSet::new();
            for j in r {
                if j.0 >= inst.num_jobs() {
                    out.push(format!("route {i} references unknown job #{}", j.0));
                } else if !seen.insert(*j) {
                    out.push(format!(
                        "job {} appears twice in the route of operator {}",
                        inst.jobs[j.0].id,
                        inst.operators.get(i).map_or("?", |o| o.id.as_str())
                    ));
                }
            }
        }
        for (i, set) in self.instruments.iter().enumerate() {
            for t in set {
                if t.0 >= inst.num_instruments() {
                    out.push(format!("operator {i} holds unknown instrument #{}", t.0));
                }
            }
        }
        out
    }

    pub fn ensure_well_formed(&self, inst: &ProblemInstance) -> Result<()> {
        let problems = self.structural_problems(inst);
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Input(problems.join("; ")))
        }
    }
}

/// Forbidden (`negative`) and mandated (`positive`) operator–job pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FixedDecisions {
    pub negative: BTreeSet<(OperatorIx, JobIx)>,
    pub positive: BTreeSet<(OperatorIx, JobIx)>,
}

impl FixedDecisions {
    pub fn new(
        negative: BTreeSet<(OperatorIx, JobIx)>,
        positive: BTreeSet<(OperatorIx, JobIx)>,
    ) -> Result<Self> {
        if let Some(both) = negative.intersection(&positive).next() {
            return Err(Error::Input(format!(
                "pair (operator #{}, job #{}) is both forbidden and mandated",
                (both.0).0,
                (both.1).0
            )));
        }
        Ok(Self { negative, positive })
    }

    /// Pairs whose job skills the operator lacks.
    pub fn from_skills(inst: &ProblemInstance) -> Self {
        let quals = Qualifications::new(inst);
        let negative = inst
            .operator_ixs()
            .flat_map(|i| inst.job_ixs().map(move |j| (i, j)))
            .filter(|&(i, j)| !quals.job_ok[i.0][j.0])
            .collect();
        Self {
            negative,
            positive: BTreeSet::new(),
        }
    }
}
