//! Core engine for composing SignWriting signs.
//!
//! * [`code`] - the six-field glyph code grammar.
//! * [`catalog`] - manifest loading and validation of the glyph inventory.
//! * [`version_map`] - code migration between inventory versions.
//! * [`classification`] - prototypes declined by exception-free rules.
//! * [`facet`] - progressive faceted search over the inventory.
//! * [`sign`] - positioned-glyph composition and the sign file format.
//! * [`stats`] - frequency and co-occurrence statistics over a corpus.
//! * [`fixtures`] - the DF-1 desk fixture and a synthetic generator.

pub mod catalog;
pub mod classification;
pub mod code;
pub mod facet;
pub mod fixtures;
pub mod sign;
pub mod stats;
pub mod version_map;

pub use catalog::{load_catalog, Catalog, CatalogError, Glyph, GlyphRole, LoadReport, LoadWarning, ManifestHeader};
pub use classification::{
    audit_schema, AuditReport, ClassificationSchema, ClassifyError, Prototype, RuleAssignment, RuleSpec,
};
pub use code::{format_glyph_code, parse_glyph_code, CodeError, CodeField, GlyphCode};
pub use facet::{FacetBox, FacetError, FacetIndex, FacetSchema, SelectionState};
pub use sign::{ComponentList, PlacementId, PositionedGlyph, Sign, SignError, Violation};
pub use stats::{
    category_distribution, cooccurrence, find_signs_with, frequency, CooccurrenceTable, Corpus, CorpusEntry,
    FrequencyTable, StatsError, SIGN_FILE_SUFFIX,
};
pub use version_map::{migrate_code, VersionMap, VersionMapError};
