//! On-disk layout of a data directory:
//!
//! ```text
//! data/maps/{map_id}.json            canonical topic map documents
//! data/sessions/{session_id}.json    session state
//! data/annotations/{session_id}.jsonl  append-only annotation log
//! ```

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use lectern::crowd::{AnnotationLog, LogEntry};
use lectern::serial;
use lectern::TopicMap;

use crate::error::ServiceError;
use crate::session::Session;

/// Ids used as file names: ASCII alphanumerics and `-_.+`, not starting with `.`.
pub fn is_storable_id(id: &str) -> bool {
    !id.is_empty()
        && !id.starts_with('.')
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.' | '+'))
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> io::Result<Self> {
        let store = Store { root: root.into() };
        for dir in ["maps", "sessions", "annotations"] {
            fs::create_dir_all(store.root.join(dir))?;
        }
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn map_path(&self, map_id: &str) -> PathBuf {
        self.root.join("maps").join(format!("{map_id}.json"))
    }

    fn session_path(&self, session_id: &str) -> PathBuf {
        self.root.join("sessions").join(format!("{session_id}.json"))
    }

    pub fn log_path(&self, session_id: &str) -> PathBuf {
        self.root.join("annotations").join(format!("{session_id}.jsonl"))
    }

    pub fn save_map(&self, map: &TopicMap) -> io::Result<()> {
        write_atomic(&self.map_path(&map.map_id), serial::to_json(map).as_bytes())
    }

    pub fn load_maps(&self) -> Result<Vec<TopicMap>, ServiceError> {
        let mut maps = Vec::new();
        for path in json_files(&self.root.join("maps"), "json")? {
            maps.push(serial::from_json(&fs::read(&path)?)?);
        }
        Ok(maps)
    }

    pub fn save_session(&self, session: &Session) -> io::Result<()> {
        let mut body = serde_json::to_vec_pretty(session).map_err(io::Error::other)?;
        body.push(b'\n');
        write_atomic(&self.session_path(&session.session_id), &body)
    }

    pub fn load_sessions(&self) -> Result<Vec<Session>, ServiceError> {
        let mut sessions = Vec::new();
        for path in json_files(&self.root.join("sessions"), "json")? {
            let session: Session = serde_json::from_slice(&fs::read(&path)?)
                .map_err(|e| ServiceError::BadRequest(format!("{}: {e}", path.display())))?;
            sessions.push(session);
        }
        Ok(sessions)
    }

    /// Replays a session's log and opens it for appending. A torn final
    /// line left by a crash is cut off first.
    pub fn open_log(&self, session_id: &str) -> Result<(AnnotationLog, LogWriter), ServiceError> {
        let path = self.log_path(session_id);
        let text = match fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) if e.kind() == io::ErrorKind::NotFound => String::new(),
            Err(e) => return Err(e.into()),
        };
        let (log, valid_len) = AnnotationLog::parse_jsonl(&text)?;
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        if valid_len < text.len() {
            file.set_len(valid_len as u64)?;
        }
        Ok((log, LogWriter { file }))
    }
}

pub struct LogWriter {
    file: File,
}

impl LogWriter {
    /// Appends one entry and waits for it to reach the disk.
    pub fn append(&mut self, entry: &LogEntry) -> io::Result<()> {
        self.file.write_all(AnnotationLog::entry_line(entry).as_bytes())?;
        self.file.sync_data()
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut file = File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)
}

fn json_files(dir: &Path, extension: &str) -> io::Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == extension))
        .collect();
    out.sort();
    Ok(out)
}
