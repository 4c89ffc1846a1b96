// On-disk layout under the data directory:
//   sessions/<session_id>.jsonl   append-only LogRecord per line
//   index.json                    snapshot of every session's info and event count
//   submissions.jsonl             accepted questions as QuestionRecord lines
//
// The per-session logs are authoritative; the index is rewritten from them on load.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use advqa_core::corpus::QuestionRecord;

use crate::error::ServiceError;
use crate::session::{EditSession, LogRecord, SessionInfo};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    #[serde(flatten)]
    pub info: SessionInfo,
    pub n_events: usize,
}

#[derive(Debug, Clone)]
pub struct SessionStore {
    root: PathBuf,
}

/// Everything recovered from disk.
#[derive(Debug, Default)]
pub struct Loaded {
    pub sessions: Vec<EditSession>,
    pub submissions: Vec<QuestionRecord>,
}

fn append_line(path: &Path, value: &impl Serialize) -> Result<(), ServiceError> {
    let mut line = serde_json::to_vec(value).map_err(|e| ServiceError::store(path, e))?;
    line.push(b'\n');
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| ServiceError::store(path, e))?;
    f.write_all(&line).map_err(|e| ServiceError::store(path, e))?;
    f.sync_data().map_err(|e| ServiceError::store(path, e))
}

/// Parses a JSONL file, dropping a final line cut short by a crash.
fn read_lines<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, ServiceError> {
    let f = File::open(path).map_err(|e| ServiceError::store(path, e))?;
    let lines: Vec<String> = BufReader::new(f)
        .lines()
        .collect::<Result<_, _>>()
        .map_err(|e| ServiceError::store(path, e))?;
    let last = lines.iter().rposition(|l| !l.trim().is_empty());
    let mut out = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(v) => out.push(v),
            Err(e) if Some(i) == last => {
                log::warn!("{}: ignoring truncated final line {}: {e}", path.display(), i + 1);
            }
            Err(e) => return Err(ServiceError::store(path, format!("line {}: {e}", i + 1))),
        }
    }
    Ok(out)
}

impl SessionStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<(Self, Loaded), ServiceError> {
        let store = SessionStore { root: root.into() };
        let dir = store.sessions_dir();
        fs::create_dir_all(&dir).map_err(|e| ServiceError::store(&dir, e))?;

        let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
            .map_err(|e| ServiceError::store(&dir, e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        let mut loaded = Loaded::default();
        for path in paths {
            let mut session = None;
            for record in read_lines::<LogRecord>(&path)? {
                EditSession::apply(&mut session, record).map_err(|m| ServiceError::store(&path, m))?;
            }
            match session {
                Some(s) => loaded.sessions.push(s),
                None => log::warn!("{}: empty session log skipped", path.display()),
            }
        }
        let subs = store.submissions_path();
        if subs.exists() {
            loaded.submissions = read_lines(&subs)?;
        }
        store.write_index(loaded.sessions.iter().map(|s| IndexEntry {
            info: s.info.clone(),
            n_events: s.events.len(),
        }))?;
        Ok((store, loaded))
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn sessions_dir(&self) -> PathBuf {
        self.root.join("sessions")
    }

    pub fn log_path(&self, session_id: &str) -> PathBuf {
        self.sessions_dir().join(format!("{session_id}.jsonl"))
    }

    pub fn index_path(&self) -> PathBuf {
        self.root.join("index.json")
    }

    pub fn submissions_path(&self) -> PathBuf {
        self.root.join("submissions.jsonl")
    }

    pub fn append(&self, session_id: &str, record: &LogRecord) -> Result<(), ServiceError> {
        append_line(&self.log_path(session_id), record)
    }

    pub fn append_submission(&self, record: &QuestionRecord) -> Result<(), ServiceError> {
        append_line(&self.submissions_path(), record)
    }

    /// Atomically replaces the index snapshot.
    pub fn write_index(&self, entries: impl IntoIterator<Item = IndexEntry>) -> Result<(), ServiceError> {
        let map: BTreeMap<String, IndexEntry> = entries.into_iter().map(|e| (e.info.session_id.clone(), e)).collect();
        let path = self.index_path();
        let tmp = self.root.join("index.json.tmp");
        let body = serde_json::to_vec_pretty(&map).map_err(|e| ServiceError::store(&path, e))?;
        fs::write(&tmp, body).map_err(|e| ServiceError::store(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| ServiceError::store(&path, e))
    }

    pub fn read_index(&self) -> Result<BTreeMap<String, IndexEntry>, ServiceError> {
        let path = self.index_path();
        let text = fs::read_to_string(&path).map_err(|e| ServiceError::store(&path, e))?;
        serde_json::from_str(&text).map_err(|e| ServiceError::store(&path, e))
    }
}
