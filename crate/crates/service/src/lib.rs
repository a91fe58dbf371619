//! HTTP editor service over the glyphforge engine.
//!
//! The catalog, classification schema and facet index are built once at
//! startup and shared read-only by every handler. Signs are stored one file
//! per sign under the corpus directory; session events go to an append-only
//! JSON-lines log.

pub mod api;
pub mod error;
pub mod events;
pub mod store;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use glyphforge_core::{
    load_catalog, Catalog, CatalogError, ClassificationSchema, ClassifyError, FacetError, FacetIndex, LoadReport,
};
use thiserror::Error;

pub use api::router;
pub use error::ApiError;
pub use events::{EventKind, EventLog, EventLogEntry};
pub use store::{SignMeta, SignRecord, SignStore, StoreError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    pub manifest: PathBuf,
    pub schema: PathBuf,
    pub corpus_dir: PathBuf,
    pub log_dir: PathBuf,
    /// Static UI bundle served at `/` when present.
    pub ui_dir: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum StartupError {
    #[error("cannot load catalog {path}: {source}")]
    Catalog {
        path: PathBuf,
        #[source]
        source: CatalogError,
    },
    #[error("cannot load classification schema {path}: {source}")]
    Schema {
        path: PathBuf,
        #[source]
        source: ClassifyError,
    },
    #[error("cannot build facet index: {0}")]
    Index(#[from] FacetError),
    #[error("corpus directory is not usable: {0}")]
    Corpus(#[source] StoreError),
    #[error("event log directory {path} is not usable: {source}")]
    EventLog {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Shared state behind every handler.
#[derive(Debug)]
pub struct AppState {
    pub catalog: Catalog,
    pub schema: ClassificationSchema,
    pub index: FacetIndex,
    /// Directory that glyph `image_ref`s are relative to.
    pub image_root: PathBuf,
    pub store: SignStore,
    pub events: EventLog,
    pub ui_dir: Option<PathBuf>,
}

impl AppState {
    /// Loads everything the service needs, failing on the first fatal
    /// problem. Image warnings are returned, not fatal.
    pub fn open(config: &ServiceConfig) -> Result<(Arc<AppState>, LoadReport), StartupError> {
        let (catalog, report) = load_catalog(&config.manifest).map_err(|source| StartupError::Catalog {
            path: config.manifest.clone(),
            source,
        })?;
        let schema = ClassificationSchema::load(&config.schema).map_err(|source| StartupError::Schema {
            path: config.schema.clone(),
            source,
        })?;
        let index = FacetIndex::build(&catalog)?;
        let store = SignStore::open(&config.corpus_dir).map_err(StartupError::Corpus)?;
        let events = EventLog::open(&config.log_dir).map_err(|source| StartupError::EventLog {
            path: config.log_dir.clone(),
            source,
        })?;
        let image_root = config.manifest.parent().map(Path::to_owned).unwrap_or_default();
        let state = AppState {
            catalog,
            schema,
            index,
            image_root,
            store,
            events,
            ui_dir: config.ui_dir.clone(),
        };
        Ok((Arc::new(state), report))
    }
}
