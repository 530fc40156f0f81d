//! On-disk workspace: environments, demonstrations, models, trajectories and
//! trial reports keyed by stable ids, plus an append-only training log.
//!
//! ```text
//! <root>/environments/<id>.json
//! <root>/demos/<id>.json
//! <root>/models/<id>.json
//! <root>/trajectories/<id>.<provenance>.csv
//! <root>/reports/<id>/{manifest.json,metrics.csv,trajectories/}
//! <root>/training-log.ndjson
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use navlearn_core::environment::Environment;
use navlearn_core::eval::TrialMetric;
use navlearn_core::irl::{BehaviorModel, DemoRecord};
use navlearn_core::planner::{Provenance, Trajectory};
use navlearn_core::scenario::TrialReport;

use crate::error::{ServiceError, ServiceResult};

const LOG_FILE: &str = "training-log.ndjson";

/// Registries a workspace keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Environment,
    Demo,
    Model,
    Trajectory,
    Report,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Environment => "environment",
            Kind::Demo => "demo",
            Kind::Model => "model",
            Kind::Trajectory => "trajectory",
            Kind::Report => "report",
        }
    }

    fn dir(self) -> &'static str {
        match self {
            Kind::Environment => "environments",
            Kind::Demo => "demos",
            Kind::Model => "models",
            Kind::Trajectory => "trajectories",
            Kind::Report => "reports",
        }
    }

    fn prefix(self) -> &'static str {
        match self {
            Kind::Environment => "env",
            Kind::Demo => "demo",
            Kind::Model => "model",
            Kind::Trajectory => "traj",
            Kind::Report => "report",
        }
    }
}

#[derive(Default)]
struct Registries {
    environments: BTreeMap<String, Arc<Environment>>,
    demos: BTreeMap<String, Arc<DemoRecord>>,
    models: BTreeMap<String, Arc<BehaviorModel>>,
    trajectories: BTreeMap<String, Arc<Trajectory>>,
    reports: BTreeSet<String>,
}

impl Registries {
    fn contains(&self, kind: Kind, id: &str) -> bool {
        match kind {
            Kind::Environment => self.environments.contains_key(id),
            Kind::Demo => self.demos.contains_key(id),
            Kind::Model => self.models.contains_key(id),
            Kind::Trajectory => self.trajectories.contains_key(id),
            Kind::Report => self.reports.contains(id),
        }
    }
}

pub fn valid_id(id: &str) -> bool {
    (1..=64).contains(&id.len()) && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
}

/// Write through a temporary file so readers never see a partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> ServiceResult<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn stem_files(dir: &Path, ext: &str) -> ServiceResult<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) == Some(ext) {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.push((stem.to_string(), path.clone()));
            }
        }
    }
    out.sort();
    Ok(out)
}

pub struct Workspace {
    root: PathBuf,
    reg: RwLock<Registries>,
    log: Mutex<()>,
}

impl Workspace {
    /// Open (creating if needed) the workspace at `root` and load every registry.
    pub fn open(root: impl Into<PathBuf>) -> ServiceResult<Self> {
        let root = root.into();
        for kind in [Kind::Environment, Kind::Demo, Kind::Model, Kind::Trajectory, Kind::Report] {
            fs::create_dir_all(root.join(kind.dir()))?;
        }
        let mut reg = Registries::default();
        for (id, path) in stem_files(&root.join(Kind::Environment.dir()), "json")? {
            reg.environments.insert(id, Arc::new(Environment::load(&path)?));
        }
        for (id, path) in stem_files(&root.join(Kind::Demo.dir()), "json")? {
            reg.demos.insert(id, Arc::new(DemoRecord::from_json(&fs::read_to_string(path)?)?));
        }
        for (id, path) in stem_files(&root.join(Kind::Model.dir()), "json")? {
            reg.models.insert(id, Arc::new(BehaviorModel::load(&path)?));
        }
        for (stem, path) in stem_files(&root.join(Kind::Trajectory.dir()), "csv")? {
            let (id, prov) = stem
                .rsplit_once('.')
                .ok_or_else(|| ServiceError::Internal(format!("trajectory file `{stem}.csv` lacks a provenance")))?;
            let prov: Provenance = prov.parse()?;
            reg.trajectories.insert(id.to_string(), Arc::new(Trajectory::load_csv(&path, prov)?));
        }
        for entry in fs::read_dir(root.join(Kind::Report.dir()))? {
            let path = entry?.path();
            if path.join("manifest.json").is_file() {
                if let Some(id) = path.file_name().and_then(|s| s.to_str()) {
                    reg.reports.insert(id.to_string());
                }
            }
        }
        Ok(Self {
            root,
            reg: RwLock::new(reg),
            log: Mutex::new(()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, Registries> {
        self.reg.read().unwrap_or_else(|e| e.into_inner())
    }

    fn write(&self) -> std::sync::RwLockWriteGuard<'_, Registries> {
        self.reg.write().unwrap_or_else(|e| e.into_inner())
    }

    /// Validate a requested id, or generate `<prefix>-<n>` with the lowest free `n`.
    pub fn new_id(&self, kind: Kind, requested: Option<&str>) -> ServiceResult<String> {
        let reg = self.read();
        match requested {
            Some(id) if !valid_id(id) => Err(ServiceError::InvalidId(id.to_string())),
            Some(id) if reg.contains(kind, id) => Err(ServiceError::Exists {
                kind: kind.name(),
                id: id.to_string(),
            }),
            Some(id) => Ok(id.to_string()),
            None => Ok((1..)
                .map(|n| format!("{}-{n}", kind.prefix()))
                .find(|id| !reg.contains(kind, id))
                .expect("unbounded")),
        }
    }

    pub fn ids(&self, kind: Kind) -> Vec<String> {
        let reg = self.read();
        match kind {
            Kind::Environment => reg.environments.keys().cloned().collect(),
            Kind::Demo => reg.demos.keys().cloned().collect(),
            Kind::Model => reg.models.keys().cloned().collect(),
            Kind::Trajectory => reg.trajectories.keys().cloned().collect(),
            Kind::Report => reg.reports.iter().cloned().collect(),
        }
    }

    fn path(&self, kind: Kind, id: &str) -> PathBuf {
        self.root.join(kind.dir()).join(format!("{id}.json"))
    }

    pub fn environment(&self, id: &str) -> ServiceResult<Arc<Environment>> {
        self.read()
            .environments
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::not_found("environment", id))
    }

    pub fn add_environment(&self, id: &str, env: Environment) -> ServiceResult<Arc<Environment>> {
        let mut reg = self.write();
        if reg.environments.contains_key(id) {
            return Err(ServiceError::Exists {
                kind: "environment",
                id: id.into(),
            });
        }
        write_atomic(&self.path(Kind::Environment, id), env.to_json()?.as_bytes())?;
        let env = Arc::new(env);
        reg.environments.insert(id.into(), env.clone());
        Ok(env)
    }

    /// Swap in a new snapshot; holders of the old `Arc` keep a consistent view.
    pub fn replace_environment(&self, id: &str, env: Environment) -> ServiceResult<Arc<Environment>> {
        let mut reg = self.write();
        if !reg.environments.contains_key(id) {
            return Err(ServiceError::not_found("environment", id));
        }
        write_atomic(&self.path(Kind::Environment, id), env.to_json()?.as_bytes())?;
        let env = Arc::new(env);
        reg.environments.insert(id.into(), env.clone());
        Ok(env)
    }

    pub fn demo(&self, id: &str) -> ServiceResult<Arc<DemoRecord>> {
        self.read()
            .demos
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::not_found("demo", id))
    }

    pub fn add_demo(&self, record: DemoRecord) -> ServiceResult<Arc<DemoRecord>> {
        let mut reg = self.write();
        if reg.demos.contains_key(&record.id) {
            return Err(ServiceError::Exists {
                kind: "demo",
                id: record.id,
            });
        }
        write_atomic(&self.path(Kind::Demo, &record.id), record.to_json()?.as_bytes())?;
        let record = Arc::new(record);
        reg.demos.insert(record.id.clone(), record.clone());
        Ok(record)
    }

    /// Remove a demonstration. Models trained on it are untouched.
    pub fn remove_demo(&self, id: &str) -> ServiceResult<()> {
        let mut reg = self.write();
        if reg.demos.remove(id).is_none() {
            return Err(ServiceError::not_found("demo", id));
        }
        fs::remove_file(self.path(Kind::Demo, id))?;
        Ok(())
    }

    pub fn model(&self, id: &str) -> ServiceResult<Arc<BehaviorModel>> {
        self.read()
            .models
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::not_found("model", id))
    }

    /// Insert or replace a model. The file is written before the registry
    /// entry is swapped, so readers see either the old or the new weights.
    pub fn publish_model(&self, id: &str, model: BehaviorModel) -> ServiceResult<Arc<BehaviorModel>> {
        if !valid_id(id) {
            return Err(ServiceError::InvalidId(id.into()));
        }
        let mut reg = self.write();
        write_atomic(&self.path(Kind::Model, id), model.to_json()?.as_bytes())?;
        let model = Arc::new(model);
        reg.models.insert(id.into(), model.clone());
        Ok(model)
    }

    pub fn trajectory(&self, id: &str) -> ServiceResult<Arc<Trajectory>> {
        self.read()
            .trajectories
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::not_found("trajectory", id))
    }

    pub fn add_trajectory(&self, id: &str, traj: Trajectory) -> ServiceResult<Arc<Trajectory>> {
        let mut reg = self.write();
        if reg.trajectories.contains_key(id) {
            return Err(ServiceError::Exists {
                kind: "trajectory",
                id: id.into(),
            });
        }
        let path = self
            .root
            .join(Kind::Trajectory.dir())
            .join(format!("{id}.{}.csv", traj.provenance()));
        write_atomic(&path, traj.to_csv().as_bytes())?;
        let traj = Arc::new(traj);
        reg.trajectories.insert(id.into(), traj.clone());
        Ok(traj)
    }

    pub fn add_report(&self, id: &str, report: &TrialReport) -> ServiceResult<()> {
        let mut reg = self.write();
        if reg.reports.contains(id) {
            return Err(ServiceError::Exists {
                kind: "report",
                id: id.into(),
            });
        }
        report.write_dir(&self.report_dir(id))?;
        reg.reports.insert(id.into());
        Ok(())
    }

    pub fn report_dir(&self, id: &str) -> PathBuf {
        self.root.join(Kind::Report.dir()).join(id)
    }

    pub fn report_metrics(&self, id: &str) -> ServiceResult<Vec<TrialMetric>> {
        if !self.read().reports.contains(id) {
            return Err(ServiceError::not_found("report", id));
        }
        Ok(TrialReport::read_metrics(&self.report_dir(id))?)
    }

    /// Append one record to the training log.
    pub fn append_event(&self, record: &serde_json::Value) -> ServiceResult<()> {
        let _guard = self.log.lock().unwrap_or_else(|e| e.into_inner());
        let mut f = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.root.join(LOG_FILE))?;
        writeln!(f, "{}", serde_json::to_string(record)?)?;
        Ok(())
    }

    pub fn events(&self) -> ServiceResult<Vec<serde_json::Value>> {
        let _guard = self.log.lock().unwrap_or_else(|e| e.into_inner());
        let path = self.root.join(LOG_FILE);
        if !path.exists() {
            return Ok(Vec::new());
        }
        fs::read_to_string(path)?
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(ServiceError::from))
            .collect()
    }
}
