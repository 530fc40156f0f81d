//! Training jobs: one running job per model, cooperative cancellation and an
//! append-only event list that streaming readers follow.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use navlearn_core::irl::{InitMode, StopReason, TrainProgress};
use serde::{Deserialize, Serialize};
use tokio::sync::watch;

use crate::error::{ServiceError, ServiceResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Cancelled,
    Failed,
}

impl JobStatus {
    pub fn is_terminal(self) -> bool {
        matches!(self, JobStatus::Done | JobStatus::Cancelled | JobStatus::Failed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobProgress {
    pub iteration: usize,
    pub gradient_norm: f64,
    pub log_likelihood: f64,
    pub elapsed_s: f64,
}

impl From<&TrainProgress> for JobProgress {
    fn from(p: &TrainProgress) -> Self {
        Self {
            iteration: p.iteration,
            gradient_norm: p.gradient_norm,
            log_likelihood: p.log_likelihood,
            elapsed_s: p.elapsed_s,
        }
    }
}

/// Snapshot of a job as served to clients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobView {
    pub id: String,
    pub model: String,
    pub init: InitMode,
    pub budget_s: f64,
    pub max_iterations: usize,
    pub demo_ids: Vec<String>,
    pub status: JobStatus,
    pub progress: Option<JobProgress>,
    pub stop_reason: Option<StopReason>,
    pub error: Option<String>,
}

/// One line of a job's event stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "lowercase")]
pub enum JobEvent {
    Progress(JobProgress),
    Status {
        status: JobStatus,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stop_reason: Option<StopReason>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        error: Option<String>,
    },
}

pub struct Job {
    view: Mutex<JobView>,
    events: Mutex<Vec<JobEvent>>,
    cancel: AtomicBool,
    tick: watch::Sender<usize>,
}

impl Job {
    fn new(view: JobView) -> Self {
        let first = JobEvent::Status {
            status: view.status,
            stop_reason: None,
            error: None,
        };
        Self {
            view: Mutex::new(view),
            events: Mutex::new(vec![first]),
            cancel: AtomicBool::new(false),
            tick: watch::channel(1).0,
        }
    }

    pub fn view(&self) -> JobView {
        self.view.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn id(&self) -> String {
        self.view().id
    }

    pub fn cancel_flag(&self) -> &AtomicBool {
        &self.cancel
    }

    pub fn request_cancel(&self) {
        self.cancel.store(true, Ordering::Relaxed);
    }

    fn push(&self, event: JobEvent) {
        let mut events = self.events.lock().unwrap_or_else(|e| e.into_inner());
        events.push(event);
        self.tick.send_replace(events.len());
    }

    pub fn record_progress(&self, p: &TrainProgress) {
        let progress = JobProgress::from(p);
        self.view.lock().unwrap_or_else(|e| e.into_inner()).progress = Some(progress.clone());
        self.push(JobEvent::Progress(progress));
    }

    /// Move to `status`. Terminal states are final; later calls are ignored.
    pub fn set_status(&self, status: JobStatus, stop_reason: Option<StopReason>, error: Option<String>) -> bool {
        {
            let mut view = self.view.lock().unwrap_or_else(|e| e.into_inner());
            if view.status.is_terminal() {
                return false;
            }
            view.status = status;
            view.stop_reason = stop_reason;
            view.error = error.clone();
        }
        self.push(JobEvent::Status {
            status,
            stop_reason,
            error,
        });
        true
    }

    /// Events from `cursor` on, and whether the list has ended.
    pub fn events_since(&self, cursor: usize) -> (Vec<JobEvent>, bool) {
        let events = self.events.lock().unwrap_or_else(|e| e.into_inner());
        let ended = matches!(events.last(), Some(JobEvent::Status { status, .. }) if status.is_terminal());
        (events[cursor.min(events.len())..].to_vec(), ended)
    }

    pub fn subscribe(&self) -> watch::Receiver<usize> {
        self.tick.subscribe()
    }
}

#[derive(Default)]
pub struct Jobs {
    jobs: Mutex<BTreeMap<String, Arc<Job>>>,
    /// Model id to the id of its running job.
    active: Mutex<HashMap<String, String>>,
}

impl Jobs {
    /// Register a queued job, rejecting it when its model already has one.
    pub fn create(&self, mut view: JobView) -> ServiceResult<Arc<Job>> {
        let mut active = self.active.lock().unwrap_or_else(|e| e.into_inner());
        if active.contains_key(&view.model) {
            return Err(ServiceError::Busy { model: view.model });
        }
        let mut jobs = self.jobs.lock().unwrap_or_else(|e| e.into_inner());
        view.id = format!("job-{}", jobs.len() + 1);
        view.status = JobStatus::Queued;
        let job = Arc::new(Job::new(view));
        let view = job.view();
        active.insert(view.model.clone(), view.id.clone());
        jobs.insert(view.id, job.clone());
        Ok(job)
    }

    /// Release the model lock held by `job`.
    pub fn release(&self, job: &Job) {
        let view = job.view();
        let mut active = self.active.lock().unwrap_or_else(|e| e.into_inner());
        if active.get(&view.model) == Some(&view.id) {
            active.remove(&view.model);
        }
    }

    pub fn get(&self, id: &str) -> ServiceResult<Arc<Job>> {
        self.jobs
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::not_found("job", id))
    }

    pub fn list(&self) -> Vec<JobView> {
        self.jobs
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .values()
            .map(|j| j.view())
            .collect()
    }
}
