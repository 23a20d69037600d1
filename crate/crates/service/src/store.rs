//! Session state: in memory, mirrored to `sessions.jsonl`.
//!
//! Every change appends the full session snapshot as one JSON line before
//! the in-memory copy is updated; on open the log is replayed and the last
//! snapshot per id wins. Recordings live at `<dir>/<id>/<category>.wav`.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, Utc};

use rspscrn_core::api::{SessionState, SessionView};
use rspscrn_core::SoundCategory;

pub const LOG_FILE: &str = "sessions.jsonl";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub type SessionHandle = Arc<tokio::sync::Mutex<SessionView>>;

#[derive(Debug)]
pub struct SessionStore {
    dir: PathBuf,
    log_path: PathBuf,
    log: Mutex<File>,
    sessions: RwLock<HashMap<String, SessionHandle>>,
}

/// Session ids are 32 lowercase hex digits.
pub fn valid_id(id: &str) -> bool {
    id.len() == 32 && id.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}

impl SessionStore {
    /// Opens or creates the store in `dir`, replaying any existing log.
    pub fn open(dir: &Path) -> Result<Self, StoreError> {
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let log_path = dir.join(LOG_FILE);
        let mut sessions = HashMap::new();
        if log_path.exists() {
            let reader = BufReader::new(File::open(&log_path).map_err(io(&log_path))?);
            for (n, line) in reader.lines().enumerate() {
                let line = line.map_err(io(&log_path))?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<SessionView>(&line) {
                    Ok(s) => {
                        sessions.insert(s.id.clone(), s);
                    }
                    // a torn final write leaves a partial line
                    Err(e) => tracing::warn!(line = n + 1, error = %e, "skipping unreadable session record"),
                }
            }
        }
        let log = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&log_path)
            .map_err(io(&log_path))?;
        let store = SessionStore {
            dir: dir.to_path_buf(),
            log_path,
            log: Mutex::new(log),
            sessions: RwLock::new(HashMap::new()),
        };
        for s in sessions.values().filter(|s| s.state == SessionState::Expired) {
            store.remove_audio(&s.id)?;
        }
        *store.sessions.write().unwrap() = sessions
            .into_iter()
            .map(|(id, s)| (id, Arc::new(tokio::sync::Mutex::new(s))))
            .collect();
        Ok(store)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn len(&self) -> usize {
        self.sessions.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Appends a snapshot and syncs it to disk.
    pub fn persist(&self, session: &SessionView) -> Result<(), StoreError> {
        let mut line = serde_json::to_vec(session).expect("session serializes");
        line.push(b'\n');
        let mut log = self.log.lock().unwrap();
        log.write_all(&line).map_err(io(&self.log_path))?;
        log.sync_data().map_err(io(&self.log_path))
    }

    pub fn create(&self, now: DateTime<Utc>) -> Result<SessionView, StoreError> {
        let session = SessionView {
            id: format!("{:032x}", rand::random::<u128>()),
            created_at: now,
            state: SessionState::Collecting,
            metadata: None,
            symptoms: None,
            recordings: Default::default(),
            result: None,
        };
        self.persist(&session)?;
        self.sessions
            .write()
            .unwrap()
            .insert(session.id.clone(), Arc::new(tokio::sync::Mutex::new(session.clone())));
        Ok(session)
    }

    pub fn get(&self, id: &str) -> Option<SessionHandle> {
        self.sessions.read().unwrap().get(id).cloned()
    }

    pub fn audio_path(&self, id: &str, category: SoundCategory) -> PathBuf {
        self.dir.join(id).join(format!("{}.wav", category.id()))
    }

    /// Writes via a temporary file and rename, so a reader never sees a
    /// partial recording.
    pub fn write_audio(&self, id: &str, category: SoundCategory, bytes: &[u8]) -> Result<(), StoreError> {
        let dir = self.dir.join(id);
        std::fs::create_dir_all(&dir).map_err(io(&dir))?;
        let path = self.audio_path(id, category);
        let tmp = path.with_extension("wav.part");
        std::fs::write(&tmp, bytes).map_err(io(&tmp))?;
        std::fs::rename(&tmp, &path).map_err(io(&path))
    }

    pub fn read_audio(&self, id: &str, category: SoundCategory) -> Result<Vec<u8>, StoreError> {
        let path = self.audio_path(id, category);
        std::fs::read(&path).map_err(io(&path))
    }

    fn remove_audio(&self, id: &str) -> Result<(), StoreError> {
        let dir = self.dir.join(id);
        match std::fs::remove_dir_all(&dir) {
            Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(io(&dir)(e)),
            _ => Ok(()),
        }
    }

    /// Marks every live session created strictly before `cutoff` as expired and
    /// deletes its recordings. Returns the number expired.
    pub async fn expire_created_before(&self, cutoff: DateTime<Utc>) -> Result<usize, StoreError> {
        let handles: Vec<SessionHandle> = self.sessions.read().unwrap().values().cloned().collect();
        let mut expired = 0;
        for handle in handles {
            let mut session = handle.lock().await;
            if session.state == SessionState::Expired || session.created_at >= cutoff {
                continue;
            }
            let mut next = session.clone();
            next.state = SessionState::Expired;
            self.persist(&next)?;
            *session = next;
            self.remove_audio(&session.id)?;
            expired += 1;
        }
        Ok(expired)
    }
}
