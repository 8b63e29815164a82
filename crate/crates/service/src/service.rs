//! Concurrent access to one project.
//!
//! Readers clone an `Arc` of the current [`Project`] and never wait on a
//! writer. Writers serialize on a mutex, mutate a private copy, persist it,
//! and only then publish it, so a failed write leaves the previous revision
//! in place.

use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::thread;
use std::time::Duration;

use collate_core::collation::{Correspondence, CorrespondenceSet};
use serde::Serialize;

use crate::error::ServiceError;
use crate::pipeline::{check_plan, run_pipeline_with_progress, RunReport};
use crate::project::{Project, Stage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunState {
    Queued,
    Running,
    Succeeded,
    Failed,
}

impl RunState {
    pub fn is_finished(self) -> bool {
        matches!(self, RunState::Succeeded | RunState::Failed)
    }
}

/// Progress of the latest pipeline run of one pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunStatus {
    pub run_id: u64,
    pub state: RunState,
    pub stages: Vec<Stage>,
    /// Stage being computed while running.
    pub current_stage: Option<Stage>,
    /// Finished and total similarity pairs of the current stage.
    pub done: usize,
    pub total: usize,
    pub report: Option<RunReport>,
    pub error: Option<String>,
}

type PairKey = (String, String);

#[derive(Debug)]
pub struct ProjectService {
    current: RwLock<Arc<Project>>,
    writer: Mutex<()>,
    runs: Mutex<HashMap<PairKey, RunStatus>>,
    next_run: AtomicU64,
}

impl ProjectService {
    pub fn new(project: Project) -> Arc<Self> {
        Arc::new(Self {
            current: RwLock::new(Arc::new(project)),
            writer: Mutex::new(()),
            runs: Mutex::new(HashMap::new()),
            next_run: AtomicU64::new(1),
        })
    }

    pub fn open(dir: &Path) -> Result<Arc<Self>, ServiceError> {
        Ok(Self::new(Project::open(dir)?))
    }

    /// The latest published project state.
    pub fn snapshot(&self) -> Arc<Project> {
        self.current.read().expect("snapshot lock").clone()
    }

    pub fn revision(&self) -> u64 {
        self.snapshot().revision()
    }

    /// Applies `f` to a copy of the project under the writer lock and
    /// publishes the copy if `f` succeeds.
    pub fn write<T>(
        &self,
        f: impl FnOnce(&mut Project) -> Result<T, ServiceError>,
    ) -> Result<T, ServiceError> {
        let _guard = self.writer.lock().expect("writer lock");
        let mut next = (*self.snapshot()).clone();
        let out = f(&mut next)?;
        *self.current.write().expect("snapshot lock") = Arc::new(next);
        Ok(out)
    }

    pub fn confirm(
        &self,
        a: &str,
        b: &str,
        i: usize,
        j: usize,
    ) -> Result<(Correspondence, u64), ServiceError> {
        self.write(|p| Ok((p.confirm(a, b, i, j)?, p.revision())))
    }

    pub fn reject(
        &self,
        a: &str,
        b: &str,
        i: usize,
        j: usize,
    ) -> Result<(Correspondence, u64), ServiceError> {
        self.write(|p| Ok((p.reject(a, b, i, j)?, p.revision())))
    }

    pub fn import(&self, a: &str, b: &str, set: &CorrespondenceSet) -> Result<u64, ServiceError> {
        self.write(|p| {
            p.import(a, b, set)?;
            Ok(p.revision())
        })
    }

    /// Runs the pipeline on the calling thread.
    pub fn run_blocking(
        &self,
        a: &str,
        b: &str,
        stages: &[Stage],
    ) -> Result<RunReport, ServiceError> {
        self.write(|p| run_pipeline_with_progress(p, a, b, stages, &|_, _, _| {}))
    }

    /// Validates the request against the current state and starts the run
    /// on a background thread. Poll [`run_status`](Self::run_status) for
    /// the outcome.
    pub fn start_run(
        self: &Arc<Self>,
        a: &str,
        b: &str,
        stages: &[Stage],
    ) -> Result<RunStatus, ServiceError> {
        check_plan(&self.snapshot(), a, b, stages)?;
        let key = (a.to_owned(), b.to_owned());
        let status = {
            let mut runs = self.runs.lock().expect("runs lock");
            if runs.get(&key).is_some_and(|r| !r.state.is_finished()) {
                return Err(ServiceError::RunInProgress(key.0, key.1));
            }
            let mut stages = stages.to_vec();
            stages.sort();
            stages.dedup();
            let status = RunStatus {
                run_id: self.next_run.fetch_add(1, Ordering::Relaxed),
                state: RunState::Queued,
                stages,
                current_stage: None,
                done: 0,
                total: 0,
                report: None,
                error: None,
            };
            runs.insert(key.clone(), status.clone());
            status
        };
        let service = Arc::clone(self);
        let stages = status.stages.clone();
        thread::spawn(move || {
            let (a, b) = (&key.0, &key.1);
            service.update_run(&key, |r| r.state = RunState::Running);
            let result = service.write(|p| {
                run_pipeline_with_progress(p, a, b, &stages, &|stage, done, total| {
                    service.update_run(&key, |r| {
                        r.current_stage = Some(stage);
                        r.done = done;
                        r.total = total;
                    })
                })
            });
            service.update_run(&key, |r| {
                r.current_stage = None;
                match result {
                    Ok(report) => {
                        r.state = RunState::Succeeded;
                        r.report = Some(report);
                    }
                    Err(e) => {
                        tracing::warn!(error = %e, "pipeline run failed");
                        r.state = RunState::Failed;
                        r.error = Some(e.to_string());
                    }
                }
            });
        });
        Ok(status)
    }

    fn update_run(&self, key: &PairKey, f: impl FnOnce(&mut RunStatus)) {
        if let Some(r) = self.runs.lock().expect("runs lock").get_mut(key) {
            f(r);
        }
    }

    /// Status of the latest run for the pair, if one was started.
    pub fn run_status(&self, a: &str, b: &str) -> Option<RunStatus> {
        self.runs
            .lock()
            .expect("runs lock")
            .get(&(a.to_owned(), b.to_owned()))
            .cloned()
    }

    /// Polls until the pair's latest run finishes.
    pub fn wait_for_run(&self, a: &str, b: &str) -> Option<RunStatus> {
        loop {
            match self.run_status(a, b) {
                Some(s) if !s.state.is_finished() => thread::sleep(Duration::from_millis(10)),
                other => return other,
            }
        }
    }
}
