//! In-memory problem store with per-problem revisions and optional
//! snapshot files.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use argwf_core::format::{self, Style};
use argwf_core::{ProblemInstance, Schedule};
use serde_json::{json, Value};

/// A stored problem and its current schedule.
#[derive(Debug, Clone)]
pub struct Entry {
    pub problem: Arc<ProblemInstance>,
    pub schedule: Schedule,
    /// Bumped on every schedule change; starts at 1.
    pub revision: u64,
}

#[derive(Debug, Default)]
pub struct Store {
    entries: RwLock<BTreeMap<String, Entry>>,
    next_id: RwLock<u64>,
    snapshots: Option<PathBuf>,
}

/// Outcome of a compare-and-set update.
pub enum Update<T> {
    Missing,
    Stale { current: u64 },
    Done(T),
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    /// A store that writes `<id>.json` under `dir` after every change and
    /// starts from the snapshots already there.
    pub fn with_snapshots(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let mut entries = BTreeMap::new();
        let mut next = 0;
        for item in fs::read_dir(&dir)? {
            let path = item?.path();
            if path.extension().is_none_or(|e| e != "json") {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(str::to_string) else {
                continue;
            };
            let entry = load(&path).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{}: {e}", path.display())))?;
            if let Some(n) = id.strip_prefix('p').and_then(|n| n.parse::<u64>().ok()) {
                next = next.max(n);
            }
            entries.insert(id, entry);
        }
        Ok(Self {
            entries: RwLock::new(entries),
            next_id: RwLock::new(next),
            snapshots: Some(dir),
        })
    }

    pub fn insert(&self, problem: ProblemInstance) -> (String, Entry) {
        let id = {
            let mut n = self.next_id.write().expect("lock");
            *n += 1;
            format!("p{n}")
        };
        let entry = Entry {
            schedule: Schedule::empty(problem.num_operators()),
            problem: Arc::new(problem),
            revision: 1,
        };
        self.entries.write().expect("lock").insert(id.clone(), entry.clone());
        self.persist(&id, &entry);
        (id, entry)
    }

    pub fn get(&self, id: &str) -> Option<Entry> {
        self.entries.read().expect("lock").get(id).cloned()
    }

    /// Replaces the schedule when `expected` is absent or matches the
    /// current revision. `f` computes the new schedule from the entry and
    /// may fail without changing anything.
    pub fn update<E>(
        &self,
        id: &str,
        expected: Option<u64>,
        f: impl FnOnce(&Entry) -> Result<Schedule, E>,
    ) -> Result<Update<Entry>, E> {
        let mut entries = self.entries.write().expect("lock");
        let Some(entry) = entries.get_mut(id) else {
            return Ok(Update::Missing);
        };
        if expected.is_some_and(|r| r != entry.revision) {
            return Ok(Update::Stale { current: entry.revision });
        }
        entry.schedule = f(entry)?;
        entry.revision += 1;
        let entry = entry.clone();
        drop(entries);
        self.persist(id, &entry);
        Ok(Update::Done(entry))
    }

    fn persist(&self, id: &str, entry: &Entry) {
        let Some(dir) = &self.snapshots else { return };
        let doc = json!({
            "problem": format::problem_to_value(&entry.problem),
            "schedule": format::schedule_to_value(&entry.problem, &entry.schedule),
            "revision": entry.revision,
        });
        // a failed snapshot leaves the in-memory state authoritative
        let _ = fs::write(dir.join(format!("{id}.json")), format::to_canonical(&doc, Style::Pretty));
    }
}

fn load(path: &Path) -> Result<Entry, String> {
    let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
    let mut doc: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let problem = format::problem_from_value(doc["problem"].take()).map_err(|e| e.to_string())?;
    let schedule = format::schedule_from_value(&problem, doc["schedule"].take()).map_err(|e| e.to_string())?;
    let revision = doc["revision"].as_u64().ok_or("missing revision")?;
    Ok(Entry {
        problem: Arc::new(problem),
        schedule,
        revision,
    })
}
