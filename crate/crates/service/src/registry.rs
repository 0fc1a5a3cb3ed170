//! Live sessions, their log files, and the snapshot cache.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use chairsearch_core::dataset::ChairId;
use chairsearch_core::engine::Engine;
use chairsearch_core::session::{event_line, header_line, Session};

use crate::error::{Result, ServiceError};

/// Append-only JSONL log of one session. Write failures mark the log as
/// degraded and stop further writes; the session itself keeps running.
#[derive(Debug)]
pub struct SessionLog {
    path: Option<PathBuf>,
    file: Option<File>,
    written: usize,
    degraded: bool,
}

impl SessionLog {
    pub fn disabled() -> Self {
        SessionLog {
            path: None,
            file: None,
            written: 0,
            degraded: false,
        }
    }

    pub fn create(dir: &Path, session: &Session) -> Self {
        let path = dir.join(format!("{}.jsonl", session.id()));
        let mut log = SessionLog {
            path: Some(path.clone()),
            file: None,
            written: 0,
            degraded: false,
        };
        match OpenOptions::new().create_new(true).append(true).open(&path) {
            Ok(f) => {
                log.file = Some(f);
                log.write_line(header_line(&session.header()));
            }
            Err(_) => log.degraded = true,
        }
        log
    }

    fn write_line(&mut self, mut line: String) {
        let Some(f) = self.file.as_mut() else { return };
        line.push('\n');
        if f.write_all(line.as_bytes()).and_then(|_| f.flush()).is_err() {
            self.degraded = true;
            self.file = None;
        }
    }

    /// Appends every event not yet written.
    pub fn sync(&mut self, session: &Session) {
        let events = session.events();
        let pending: Vec<String> = events[self.written.min(events.len())..].iter().map(event_line).collect();
        self.written = events.len();
        for line in pending {
            self.write_line(line);
        }
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn is_degraded(&self) -> bool {
        self.degraded
    }
}

#[derive(Debug)]
pub struct LiveSession {
    pub session: Session,
    pub log: SessionLog,
}

impl LiveSession {
    pub fn sync_log(&mut self) {
        self.log.sync(&self.session);
    }
}

pub type SessionHandle = Arc<Mutex<LiveSession>>;

/// Locks a session, recovering from a panicked holder.
pub fn lock(handle: &SessionHandle) -> MutexGuard<'_, LiveSession> {
    handle.lock().unwrap_or_else(|e| e.into_inner())
}

#[derive(Debug, Default)]
pub struct Registry {
    sessions: RwLock<HashMap<String, SessionHandle>>,
}

impl Registry {
    pub fn insert(&self, live: LiveSession) -> SessionHandle {
        let id = live.session.id().to_string();
        let handle = Arc::new(Mutex::new(live));
        self.sessions
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(id, handle.clone());
        handle
    }

    pub fn get(&self, id: &str) -> Result<SessionHandle> {
        self.sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.into()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.sessions.read().unwrap_or_else(|e| e.into_inner()).contains_key(id)
    }

    /// Sorted session ids.
    pub fn ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self
            .sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .keys()
            .cloned()
            .collect();
        ids.sort();
        ids
    }

    pub fn handles(&self) -> Vec<SessionHandle> {
        self.sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .values()
            .cloned()
            .collect()
    }
}

/// Rendered snapshot PNGs keyed by (chair, view). Rendering is
/// deterministic, so eviction never changes a response.
#[derive(Debug)]
pub struct SnapshotCache {
    capacity: usize,
    entries: Mutex<HashMap<(ChairId, usize), Arc<Vec<u8>>>>,
}

impl SnapshotCache {
    pub fn new(capacity: usize) -> Self {
        SnapshotCache {
            capacity,
            entries: Mutex::new(HashMap::new()),
        }
    }

    pub fn get_or_render(&self, engine: &Engine, chair_id: ChairId, view: usize) -> Result<Arc<Vec<u8>>> {
        if let Some(png) = self.entries.lock().unwrap_or_else(|e| e.into_inner()).get(&(chair_id, view)) {
            return Ok(png.clone());
        }
        if engine.model(chair_id).is_none() {
            return Err(ServiceError::UnknownChair(chair_id));
        }
        let png = Arc::new(engine.snapshot(chair_id, view).map_err(|e| ServiceError::Invalid(e.to_string()))?.to_png()?);
        let mut entries = self.entries.lock().unwrap_or_else(|e| e.into_inner());
        if entries.len() >= self.capacity {
            entries.clear();
        }
        entries.insert((chair_id, view), png.clone());
        Ok(png)
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
