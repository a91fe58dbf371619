//! Code migration between catalog versions.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::Catalog;
use crate::code::GlyphCode;
use crate::sign::{Sign, SignError};

#[derive(Debug, Error)]
pub enum VersionMapError {
    #[error("codes {first} and {second} both map to {target}")]
    NotInjective {
        first: GlyphCode,
        second: GlyphCode,
        target: GlyphCode,
    },
    #[error("code {0} appears twice in the map domain")]
    DuplicateSource(GlyphCode),
    #[error("code {code} is not in catalog {version}")]
    NotInCatalog { code: GlyphCode, version: String },
    #[error("catalog version {found:?} does not match map version {expected:?}")]
    VersionMismatch { expected: String, found: String },
    #[error("code {0} has no mapping (retired or redrawn between versions)")]
    Unmapped(GlyphCode),
    #[error("invalid version map file: {0}")]
    Format(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Sign(#[from] SignError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodePair {
    pub from: GlyphCode,
    pub to: GlyphCode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VersionMapFile {
    from_version: String,
    to_version: String,
    pairs: Vec<CodePair>,
}

/// An injective code mapping from one catalog version to another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VersionMap {
    from_version: String,
    to_version: String,
    pairs: BTreeMap<GlyphCode, GlyphCode>,
}

impl VersionMap {
    pub fn new(
        from_version: impl Into<String>,
        to_version: impl Into<String>,
        pairs: impl IntoIterator<Item = (GlyphCode, GlyphCode)>,
    ) -> Result<VersionMap, VersionMapError> {
        let mut forward = BTreeMap::new();
        let mut reverse: BTreeMap<GlyphCode, GlyphCode> = BTreeMap::new();
        for (from, to) in pairs {
            if forward.insert(from, to).is_some() {
                return Err(VersionMapError::DuplicateSource(from));
            }
            if let Some(prev) = reverse.insert(to, from) {
                return Err(VersionMapError::NotInjective {
                    first: prev,
                    second: from,
                    target: to,
                });
            }
        }
        Ok(VersionMap {
            from_version: from_version.into(),
            to_version: to_version.into(),
            pairs: forward,
        })
    }

    pub fn from_json(text: &str) -> Result<VersionMap, VersionMapError> {
        let file: VersionMapFile = serde_json::from_str(text)?;
        VersionMap::new(
            file.from_version,
            file.to_version,
            file.pairs.into_iter().map(|p| (p.from, p.to)),
        )
    }

    pub fn load(path: &Path) -> Result<VersionMap, VersionMapError> {
        VersionMap::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let file = VersionMapFile {
            from_version: self.from_version.clone(),
            to_version: self.to_version.clone(),
            pairs: self.pairs.iter().map(|(&from, &to)| CodePair { from, to }).collect(),
        };
        serde_json::to_string_pretty(&file).expect("version map serializes")
    }

    pub fn from_version(&self) -> &str {
        &self.from_version
    }

    pub fn to_version(&self) -> &str {
        &self.to_version
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&GlyphCode, &GlyphCode)> {
        self.pairs.iter()
    }

    /// Checks that the domain lies in `from` and the range in `to`.
    pub fn validate(&self, from: &Catalog, to: &Catalog) -> Result<(), VersionMapError> {
        for (catalog, expected) in [(from, &self.from_version), (to, &self.to_version)] {
            if catalog.version_tag() != expected {
                return Err(VersionMapError::VersionMismatch {
                    expected: expected.clone(),
                    found: catalog.version_tag().to_owned(),
                });
            }
        }
        for (src, dst) in &self.pairs {
            if !from.contains(src) {
                return Err(VersionMapError::NotInCatalog {
                    code: *src,
                    version: self.from_version.clone(),
                });
            }
            if !to.contains(dst) {
                return Err(VersionMapError::NotInCatalog {
                    code: *dst,
                    version: self.to_version.clone(),
                });
            }
        }
        Ok(())
    }

    /// Inverse map. Injectivity is guaranteed at construction, so every map
    /// is invertible over its range.
    pub fn inverse(&self) -> VersionMap {
        VersionMap {
            from_version: self.to_version.clone(),
            to_version: self.from_version.clone(),
            pairs: self.pairs.iter().map(|(a, b)| (*b, *a)).collect(),
        }
    }

    /// Migrates every placement of a sign; fails on the first unmapped code.
    pub fn migrate_sign(&self, sign: &Sign) -> Result<Sign, VersionMapError> {
        let mut out = sign.clone();
        for p in out.placements_mut() {
            p.code = migrate_code(self, &p.code)?;
        }
        Ok(out)
    }
}

pub fn migrate_code(map: &VersionMap, code: &GlyphCode) -> Result<GlyphCode, VersionMapError> {
    map.pairs.get(code).copied().ok_or(VersionMapError::Unmapped(*code))
}
