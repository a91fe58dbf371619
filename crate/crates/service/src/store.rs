//! File-per-sign storage.
//!
//! Each sign lives in `<dir>/<id>.sign.json` in canonical form, with its
//! timestamps in `<dir>/<id>.meta.json`. There is no index file; the
//! directory listing is the index. Writes go to a temporary file in the
//! same directory and are renamed into place.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use chrono::{DateTime, SecondsFormat, Utc};
use glyphforge_core::{Sign, SignError, SIGN_FILE_SUFFIX};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const META_SUFFIX: &str = ".meta.json";
const MAX_ID_LEN: usize = 128;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("sign id {0:?} must be 1-128 characters of A-Z, a-z, 0-9, '_' or '-'")]
    BadId(String),
    #[error("no sign with id {0:?}")]
    NotFound(String),
    #[error("a sign with id {0:?} already exists")]
    Exists(String),
    #[error("stored sign {id:?} is corrupt: {source}")]
    Corrupt {
        id: String,
        #[source]
        source: SignError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_owned(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignMeta {
    pub created_at: String,
    pub modified_at: String,
}

/// A sign as read back from disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignRecord {
    pub sign: Sign,
    /// The canonical file text.
    pub body: String,
    pub meta: SignMeta,
}

pub fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= MAX_ID_LEN && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

pub fn fresh_id() -> String {
    let mut bytes = [0u8; 16];
    rand::rng().fill_bytes(&mut bytes);
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `bytes` to `path` by way of a synced temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("file");
    let tmp = dir.join(format!(".{name}.{}.tmp", fresh_id()));
    let result = (|| {
        let mut file = File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        fs::rename(&tmp, path)?;
        // make the rename itself durable; not every platform allows this
        if let Ok(d) = File::open(dir) {
            let _ = d.sync_all();
        }
        Ok(())
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

#[derive(Debug)]
pub struct SignStore {
    dir: PathBuf,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
    clock: Mutex<DateTime<Utc>>,
}

impl SignStore {
    /// Opens `dir`, creating it if needed, and checks that it is writable.
    pub fn open(dir: &Path) -> Result<SignStore, StoreError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let probe = dir.join(format!(".probe.{}", fresh_id()));
        File::create(&probe).map_err(io_err(dir))?;
        fs::remove_file(&probe).map_err(io_err(&probe))?;
        Ok(SignStore {
            dir: dir.to_owned(),
            locks: Mutex::new(HashMap::new()),
            clock: Mutex::new(DateTime::<Utc>::MIN_UTC),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn sign_path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}{SIGN_FILE_SUFFIX}"))
    }

    fn meta_path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}{META_SUFFIX}"))
    }

    fn lock(&self, id: &str) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry(id.to_owned()).or_default().clone()
    }

    /// Strictly increasing within this process, so creation order survives
    /// timestamp ties.
    fn now(&self) -> String {
        let mut last = self.clock.lock().unwrap_or_else(|e| e.into_inner());
        let mut now = Utc::now();
        if now <= *last {
            now = *last + chrono::Duration::microseconds(1);
        }
        *last = now;
        now.to_rfc3339_opts(SecondsFormat::Micros, true)
    }

    fn check_id(id: &str) -> Result<(), StoreError> {
        if valid_id(id) {
            Ok(())
        } else {
            Err(StoreError::BadId(id.to_owned()))
        }
    }

    fn write(&self, sign: &Sign, meta: &SignMeta) -> Result<(), StoreError> {
        let id = sign.sign_id();
        let meta_path = self.meta_path(id);
        let meta_text = serde_json::to_string_pretty(meta).expect("meta serializes") + "\n";
        write_atomic(&meta_path, meta_text.as_bytes()).map_err(io_err(&meta_path))?;
        let path = self.sign_path(id);
        write_atomic(&path, sign.serialize().as_bytes()).map_err(io_err(&path))
    }

    /// Stores a new sign. An empty `sign_id` gets a generated one.
    pub fn create(&self, sign: &Sign) -> Result<String, StoreError> {
        let id = if sign.sign_id().is_empty() {
            fresh_id()
        } else {
            sign.sign_id().to_owned()
        };
        Self::check_id(&id)?;
        let lock = self.lock(&id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        if self.sign_path(&id).exists() {
            return Err(StoreError::Exists(id));
        }
        let now = self.now();
        let meta = SignMeta {
            created_at: now.clone(),
            modified_at: now,
        };
        self.write(&sign.with_sign_id(id.clone()), &meta)?;
        Ok(id)
    }

    /// Replaces an existing sign; the last write wins.
    pub fn update(&self, id: &str, sign: &Sign) -> Result<SignMeta, StoreError> {
        Self::check_id(id)?;
        let lock = self.lock(id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        if !self.sign_path(id).exists() {
            return Err(StoreError::NotFound(id.to_owned()));
        }
        let now = self.now();
        let created_at = self.read_meta(id).map_or_else(|| now.clone(), |m| m.created_at);
        let meta = SignMeta {
            created_at,
            modified_at: now,
        };
        self.write(&sign.with_sign_id(id), &meta)?;
        Ok(meta)
    }

    fn read_meta(&self, id: &str) -> Option<SignMeta> {
        let text = fs::read_to_string(self.meta_path(id)).ok()?;
        serde_json::from_str(&text).ok()
    }

    // Falls back to the file's modification time when the sidecar is gone.
    fn meta_or_mtime(&self, id: &str) -> SignMeta {
        self.read_meta(id).unwrap_or_else(|| {
            let stamp = fs::metadata(self.sign_path(id))
                .and_then(|m| m.modified())
                .map(DateTime::<Utc>::from)
                .unwrap_or(DateTime::<Utc>::UNIX_EPOCH)
                .to_rfc3339_opts(SecondsFormat::Micros, true);
            SignMeta {
                created_at: stamp.clone(),
                modified_at: stamp,
            }
        })
    }

    /// Reads a sign, re-validating it and recomputing its components.
    pub fn get(&self, id: &str) -> Result<SignRecord, StoreError> {
        if !valid_id(id) {
            return Err(StoreError::NotFound(id.to_owned()));
        }
        let path = self.sign_path(id);
        let text = match fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(StoreError::NotFound(id.to_owned())),
            Err(e) => return Err(io_err(&path)(e)),
        };
        let sign = Sign::parse(&text).map_err(|source| StoreError::Corrupt {
            id: id.to_owned(),
            source,
        })?;
        Ok(SignRecord {
            body: sign.serialize(),
            sign,
            meta: self.meta_or_mtime(id),
        })
    }

    pub fn delete(&self, id: &str) -> Result<(), StoreError> {
        if !valid_id(id) {
            return Err(StoreError::NotFound(id.to_owned()));
        }
        let lock = self.lock(id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let path = self.sign_path(id);
        match fs::remove_file(&path) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(StoreError::NotFound(id.to_owned())),
            Err(e) => return Err(io_err(&path)(e)),
        }
        let _ = fs::remove_file(self.meta_path(id));
        Ok(())
    }

    /// Stored ids ordered by creation time.
    pub fn list(&self) -> Result<Vec<(String, SignMeta)>, StoreError> {
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.dir).map_err(io_err(&self.dir))? {
            let entry = entry.map_err(io_err(&self.dir))?;
            let name = entry.file_name();
            let Some(id) = name.to_str().and_then(|n| n.strip_suffix(SIGN_FILE_SUFFIX)) else {
                continue;
            };
            if valid_id(id) {
                out.push((id.to_owned(), self.meta_or_mtime(id)));
            }
        }
        out.sort_by(|a, b| (&a.1.created_at, &a.0).cmp(&(&b.1.created_at, &b.0)));
        Ok(out)
    }
}
