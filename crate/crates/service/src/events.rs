//! Append-only session event log, one JSON object per line.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const EVENT_LOG_FILE: &str = "events.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    TaskStart,
    TaskEnd,
    SearchSelect,
    SearchClear,
    GlyphPlaced,
    GlyphMoved,
    GlyphRemoved,
    SignSaved,
    ErrorShown,
}

impl EventKind {
    pub const ALL: [EventKind; 9] = [
        EventKind::TaskStart,
        EventKind::TaskEnd,
        EventKind::SearchSelect,
        EventKind::SearchClear,
        EventKind::GlyphPlaced,
        EventKind::GlyphMoved,
        EventKind::GlyphRemoved,
        EventKind::SignSaved,
        EventKind::ErrorShown,
    ];

    pub fn parse(name: &str) -> Option<EventKind> {
        serde_json::from_value(Value::String(name.to_owned())).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventLogEntry {
    pub session_id: String,
    pub at: String,
    pub kind: EventKind,
    pub payload: Value,
}

struct Writer {
    file: File,
    last: DateTime<Utc>,
}

/// Serializes appends through one file handle. Each append is a single
/// `write_all` of a full line followed by `sync_data`.
pub struct EventLog {
    path: PathBuf,
    writer: Mutex<Writer>,
}

impl std::fmt::Debug for EventLog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EventLog").field("path", &self.path).finish()
    }
}

impl EventLog {
    pub fn open(dir: &Path) -> io::Result<EventLog> {
        fs::create_dir_all(dir)?;
        let path = dir.join(EVENT_LOG_FILE);
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        // resume the clock after the newest entry already in the file
        let last = read_log(&path)?
            .iter()
            .filter_map(|e| DateTime::parse_from_rfc3339(&e.at).ok())
            .map(|t| t.with_timezone(&Utc))
            .max()
            .unwrap_or(DateTime::<Utc>::MIN_UTC);
        Ok(EventLog {
            path,
            writer: Mutex::new(Writer { file, last }),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Appends an entry and returns it once it is on disk. Timestamps never
    /// go backwards across appends.
    pub fn append(&self, session_id: &str, kind: EventKind, payload: Value) -> io::Result<EventLogEntry> {
        let mut w = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        let mut now = Utc::now();
        if now <= w.last {
            now = w.last + chrono::Duration::microseconds(1);
        }
        let entry = EventLogEntry {
            session_id: session_id.to_owned(),
            at: now.to_rfc3339_opts(SecondsFormat::Micros, true),
            kind,
            payload,
        };
        let mut line = serde_json::to_vec(&entry).map_err(io::Error::other)?;
        line.push(b'\n');
        w.file.write_all(&line)?;
        w.file.sync_data()?;
        w.last = now;
        Ok(entry)
    }
}

pub fn read_log(path: &Path) -> io::Result<Vec<EventLogEntry>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn kinds_round_trip() {
        for kind in EventKind::ALL {
            let name = serde_json::to_value(kind).unwrap();
            assert_eq!(EventKind::parse(name.as_str().unwrap()), Some(kind));
        }
        assert_eq!(EventKind::parse("foo"), None);
    }

    #[test]
    fn appends_survive_reopen_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let log = EventLog::open(dir.path()).unwrap();
        let a = log.append("s1", EventKind::TaskStart, json!({})).unwrap();
        let b = log
            .append("s1", EventKind::GlyphPlaced, json!({"code": "01-01-001-01-01-01"}))
            .unwrap();
        assert!(a.at < b.at);
        drop(log);

        let log = EventLog::open(dir.path()).unwrap();
        let c = log.append("s1", EventKind::TaskEnd, Value::Null).unwrap();
        assert!(b.at < c.at);
        assert_eq!(read_log(log.path()).unwrap(), vec![a, b, c]);
    }
}
