//! Directory-per-project storage.
//!
//! ```text
//! <root>/<project_id>/project.json   snapshot, replaced via temp file + rename
//! <root>/<project_id>/events.jsonl   append-only action log, fsync per append
//! ```
//!
//! The log is authoritative: [`Store::load`] replays it, so a crash between
//! the append and the snapshot rewrite loses nothing.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use flexmind_core::model::{ActionEvent, Project, SCHEMA_VERSION};
use flexmind_core::ProjectId;
use thiserror::Error;

const SNAPSHOT: &str = "project.json";
const LOG: &str = "events.jsonl";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StoreError {
    #[error("io error: {0}")]
    Io(String),
    #[error("corrupt project `{id}`: {reason}")]
    CorruptProject { id: String, reason: String },
    #[error("unknown project `{0}`")]
    UnknownProject(String),
    #[error("project `{0}` already exists")]
    ProjectExists(String),
    #[error("invalid project id `{0}`")]
    InvalidId(String),
}

impl StoreError {
    pub fn code(&self) -> &'static str {
        match self {
            StoreError::Io(_) => "IoError",
            StoreError::CorruptProject { .. } => "CorruptProject",
            StoreError::UnknownProject(_) => "UnknownProject",
            StoreError::ProjectExists(_) => "ProjectExists",
            StoreError::InvalidId(_) => "InvalidArgument",
        }
    }
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> StoreError + '_ {
    move |e| StoreError::Io(format!("{}: {e}", path.display()))
}

/// Project ids double as directory names.
pub fn valid_project_id(id: &str) -> bool {
    (1..=64).contains(&id.len()) && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(io(&root))?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dir(&self, id: &str) -> Result<PathBuf, StoreError> {
        if !valid_project_id(id) {
            return Err(StoreError::InvalidId(id.to_owned()));
        }
        Ok(self.root.join(id))
    }

    pub fn exists(&self, id: &str) -> bool {
        self.dir(id).is_ok_and(|d| d.join(SNAPSHOT).is_file())
    }

    /// Ids of stored projects, sorted.
    pub fn list(&self) -> Result<Vec<ProjectId>, StoreError> {
        let mut ids: Vec<String> = fs::read_dir(&self.root)
            .map_err(io(&self.root))?
            .filter_map(|e| e.ok())
            .filter_map(|e| e.file_name().into_string().ok())
            .filter(|name| self.exists(name))
            .collect();
        ids.sort();
        Ok(ids.into_iter().map(ProjectId::new).collect())
    }

    /// Writes a fresh project: its snapshot and its whole log.
    pub fn create(&self, project: &Project) -> Result<(), StoreError> {
        let dir = self.dir(project.id.as_str())?;
        if dir.join(SNAPSHOT).exists() {
            return Err(StoreError::ProjectExists(project.id.to_string()));
        }
        fs::create_dir_all(&dir).map_err(io(&dir))?;
        let log = dir.join(LOG);
        fs::write(&log, project.log_jsonl()).map_err(io(&log))?;
        self.write_snapshot(project)
    }

    /// Appends `events` (already applied to `project`) and refreshes the
    /// snapshot.
    pub fn append(&self, project: &Project, events: &[ActionEvent]) -> Result<(), StoreError> {
        let dir = self.dir(project.id.as_str())?;
        if !events.is_empty() {
            let path = dir.join(LOG);
            let mut file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&path)
                .map_err(io(&path))?;
            let mut buf = String::new();
            for event in events {
                buf.push_str(&event.to_json_line());
                buf.push('\n');
            }
            file.write_all(buf.as_bytes()).map_err(io(&path))?;
            file.sync_data().map_err(io(&path))?;
        }
        self.write_snapshot(project)
    }

    fn write_snapshot(&self, project: &Project) -> Result<(), StoreError> {
        let dir = self.dir(project.id.as_str())?;
        let tmp = dir.join(format!("{SNAPSHOT}.tmp"));
        let mut file = File::create(&tmp).map_err(io(&tmp))?;
        file.write_all(project.to_json().as_bytes()).map_err(io(&tmp))?;
        file.sync_all().map_err(io(&tmp))?;
        let target = dir.join(SNAPSHOT);
        fs::rename(&tmp, &target).map_err(io(&target))
    }

    /// Loads a project by replaying its log over the stored brief.
    pub fn load(&self, id: &str) -> Result<Project, StoreError> {
        let dir = self.dir(id)?;
        let snapshot_path = dir.join(SNAPSHOT);
        if !snapshot_path.is_file() {
            return Err(StoreError::UnknownProject(id.to_owned()));
        }
        let corrupt = |reason: String| StoreError::CorruptProject {
            id: id.to_owned(),
            reason,
        };
        let text = fs::read_to_string(&snapshot_path).map_err(io(&snapshot_path))?;
        let header: serde_json::Value = serde_json::from_str(&text).map_err(|e| corrupt(format!("{SNAPSHOT}: {e}")))?;
        let version = header.get("schema_version").and_then(|v| v.as_u64());
        if version != Some(u64::from(SCHEMA_VERSION)) {
            return Err(corrupt(format!(
                "schema version {version:?}, expected {SCHEMA_VERSION}"
            )));
        }
        let snapshot: Project = serde_json::from_value(header).map_err(|e| corrupt(format!("{SNAPSHOT}: {e}")))?;
        let log_path = dir.join(LOG);
        let log_text = match fs::read_to_string(&log_path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
            Err(e) => return Err(io(&log_path)(e)),
        };
        let events = ActionEvent::parse_jsonl(&log_text).map_err(|e| corrupt(format!("{LOG}: {e}")))?;
        Project::replay(snapshot.id.clone(), snapshot.brief.clone(), &events)
            .map_err(|e| corrupt(format!("{LOG}: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use flexmind_core::{DesignBrief, Session, SteppingClock};

    use super::*;

    fn project() -> Project {
        let brief = DesignBrief::new("b", "Brief", "Keep shirts fresh.").unwrap();
        let mut s = Session::new(ProjectId::new("p1"), brief, Arc::new(SteppingClock::new(0, 5)));
        let idea = s.add_user_idea("Cedar Sleeve", "Wooden insert.").unwrap();
        s.create_canvas_from_idea(&idea).unwrap();
        s.into_project()
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let p = project();
        store.create(&p).unwrap();
        assert_eq!(store.load("p1").unwrap(), p);
        assert_eq!(store.list().unwrap(), vec![ProjectId::new("p1")]);
        assert_eq!(store.create(&p).unwrap_err().code(), "ProjectExists");
    }

    #[test]
    fn truncated_snapshot_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        store.create(&project()).unwrap();
        let path = dir.path().join("p1").join(SNAPSHOT);
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert_eq!(store.load("p1").unwrap_err().code(), "CorruptProject");
    }

    #[test]
    fn version_mismatch_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        store.create(&project()).unwrap();
        let path = dir.path().join("p1").join(SNAPSHOT);
        let text = fs::read_to_string(&path)
            .unwrap()
            .replacen("\"schema_version\": 1", "\"schema_version\": 9", 1);
        fs::write(&path, text).unwrap();
        assert_eq!(store.load("p1").unwrap_err().code(), "CorruptProject");
    }

    #[test]
    fn log_wins_over_stale_snapshot() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let p = project();
        let first = Project::replay(p.id.clone(), p.brief.clone(), &p.action_log()[..1]).unwrap();
        store.create(&first).unwrap();
        // Simulate a crash after the append but before the snapshot rewrite.
        let log = dir.path().join("p1").join(LOG);
        let mut f = OpenOptions::new().append(true).open(&log).unwrap();
        writeln!(f, "{}", p.action_log()[1].to_json_line()).unwrap();
        assert_eq!(store.load("p1").unwrap(), p);
    }

    #[test]
    fn ids_are_sanitized() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        assert_eq!(store.load("../etc").unwrap_err().code(), "InvalidArgument");
        assert_eq!(store.load("nope").unwrap_err().code(), "UnknownProject");
    }
}
