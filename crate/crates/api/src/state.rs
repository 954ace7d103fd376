use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use flexmind_core::llm::{Orchestrator, ScaffoldRequest};
use flexmind_core::model::{ActionEvent, Project};
use flexmind_core::{CardId, Clock, DesignBrief, ProjectId, Session};
use serde::Serialize;
use tokio::sync::Mutex as AsyncMutex;

use crate::error::ApiError;
use crate::store::{valid_project_id, Store};

/// Progress of the asynchronous overview chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum OverviewStatus {
    Pending,
    Ready,
    Failed { error: ApiError },
}

type Handle = Arc<AsyncMutex<Session>>;

struct Inner {
    store: Store,
    orchestrator: Arc<Orchestrator>,
    clock: Arc<dyn Clock>,
    sessions: Mutex<HashMap<String, Handle>>,
    overview: Mutex<HashMap<String, OverviewStatus>>,
}

/// Shared server state. Each project has one async mutex that acts as its
/// command queue; different projects never contend.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

impl AppState {
    pub fn new(store: Store, orchestrator: Orchestrator, clock: Arc<dyn Clock>) -> Self {
        Self {
            inner: Arc::new(Inner {
                store,
                orchestrator: Arc::new(orchestrator),
                clock,
                sessions: Mutex::new(HashMap::new()),
                overview: Mutex::new(HashMap::new()),
            }),
        }
    }

    pub fn store(&self) -> &Store {
        &self.inner.store
    }

    pub fn orchestrator(&self) -> &Orchestrator {
        &self.inner.orchestrator
    }

    fn handle(&self, id: &str) -> Result<Handle, ApiError> {
        let mut sessions = self.inner.sessions.lock().expect("session map lock");
        if let Some(h) = sessions.get(id) {
            return Ok(h.clone());
        }
        let project = self.inner.store.load(id)?;
        let handle = Arc::new(AsyncMutex::new(Session::from_project(
            project,
            self.inner.clock.clone(),
        )));
        sessions.insert(id.to_owned(), handle.clone());
        Ok(handle)
    }

    fn evict(&self, id: &str) {
        self.inner.sessions.lock().expect("session map lock").remove(id);
    }

    /// Creates and persists an empty project.
    pub fn create_project(&self, id: Option<String>, brief: DesignBrief) -> Result<ProjectId, ApiError> {
        let id = match id {
            Some(id) if !valid_project_id(&id) => {
                return Err(ApiError::new("InvalidArgument", format!("invalid project id `{id}`")))
            }
            Some(id) => id,
            None => self.fresh_id()?,
        };
        let project = Project::new(ProjectId::new(id.clone()), brief);
        self.inner.store.create(&project)?;
        Ok(project.id)
    }

    fn fresh_id(&self) -> Result<String, ApiError> {
        let taken = self.inner.store.list()?.len();
        (taken + 1..)
            .map(|n| format!("project-{n:04}"))
            .find(|id| !self.inner.store.exists(id))
            .ok_or_else(|| ApiError::internal("no free project id"))
    }

    /// Read-only access to the current project state.
    pub async fn read<T>(&self, id: &str, f: impl FnOnce(&Project) -> T) -> Result<T, ApiError> {
        let handle = self.handle(id)?;
        let session = handle.lock().await;
        Ok(f(session.project()))
    }

    /// Runs one command under the project's lock and persists the events it
    /// appended. On a storage failure the cached session is dropped so the
    /// next request reloads what is actually on disk.
    pub async fn mutate<T>(
        &self,
        id: &str,
        f: impl FnOnce(&mut Session) -> Result<T, ApiError>,
    ) -> Result<T, ApiError> {
        let handle = self.handle(id)?;
        let mut session = handle.lock().await;
        let before = session.project().action_log().len();
        let out = f(&mut session)?;
        let project = session.project();
        if let Err(e) = self.inner.store.append(project, &project.action_log()[before..]) {
            drop(session);
            self.evict(id);
            return Err(e.into());
        }
        Ok(out)
    }

    /// Snapshot, call the model without holding the lock, then commit.
    pub async fn scaffold(&self, id: &str, target: &CardId, request: ScaffoldRequest) -> Result<ActionEvent, ApiError> {
        let context = {
            let handle = self.handle(id)?;
            let session = handle.lock().await;
            session.scaffold_context(target, request)?
        };
        let orchestrator = self.inner.orchestrator.clone();
        let outcome = tokio::task::spawn_blocking(move || orchestrator.run(&context))
            .await
            .map_err(|e| ApiError::internal(e.to_string()))??;
        self.mutate(id, |s| Ok(s.commit_scaffold(outcome)?)).await
    }

    pub fn overview_status(&self, id: &str, project: &Project) -> OverviewStatus {
        if let Some(s) = self.inner.overview.lock().expect("status lock").get(id) {
            return s.clone();
        }
        if project.categories.is_empty() {
            OverviewStatus::Failed {
                error: ApiError::new("Interrupted", "overview generation is not running; restart it"),
            }
        } else {
            OverviewStatus::Ready
        }
    }

    fn set_status(&self, id: &str, status: OverviewStatus) {
        self.inner
            .overview
            .lock()
            .expect("status lock")
            .insert(id.to_owned(), status);
    }

    /// Starts the overview chain in the background. Fails with
    /// `OverviewPending` if a run is already in flight.
    pub fn start_overview(&self, id: &ProjectId, brief: DesignBrief) -> Result<(), ApiError> {
        {
            let mut map = self.inner.overview.lock().expect("status lock");
            if map.get(id.as_str()) == Some(&OverviewStatus::Pending) {
                return Err(ApiError::new("OverviewPending", "overview generation already running"));
            }
            map.insert(id.to_string(), OverviewStatus::Pending);
        }
        let state = self.clone();
        let id = id.to_string();
        tokio::spawn(async move {
            let orchestrator = state.inner.orchestrator.clone();
            let result = tokio::task::spawn_blocking(move || orchestrator.generate_overview(&brief)).await;
            let committed = match result {
                Ok(Ok(overview)) => state
                    .mutate(&id, |s| Ok(s.record_overview(overview)?))
                    .await
                    .map(|_| ()),
                Ok(Err(e)) => Err(e.into()),
                Err(e) => Err(ApiError::internal(e.to_string())),
            };
            let status = match committed {
                Ok(()) => OverviewStatus::Ready,
                Err(error) => {
                    tracing::warn!(project = %id, %error, "overview generation failed");
                    OverviewStatus::Failed { error }
                }
            };
            state.set_status(&id, status);
        });
        Ok(())
    }
}
