//! Corpus statistics over stored component lists.
//!
//! Every statistic reads only the component multiset of each sign, never
//! canvas geometry, so moving glyphs inside a sign changes nothing here.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::catalog::{Catalog, GlyphRole};
use crate::code::GlyphCode;
use crate::sign::{ComponentList, Sign, SignError};

/// Suffix of sign files inside a corpus directory.
pub const SIGN_FILE_SUFFIX: &str = ".sign.json";

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("pattern must name at least one glyph code")]
    EmptyPattern,
    #[error("sign {sign_id} uses {code}, which the catalog does not contain")]
    UnknownCode { sign_id: String, code: GlyphCode },
    #[error("sign id {0:?} appears twice in the corpus")]
    DuplicateSign(String),
    #[error("{path}: {source}")]
    BadSignFile {
        path: PathBuf,
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

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub sign: Sign,
    pub components: ComponentList,
}

/// A set of stored signs keyed by id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    signs: BTreeMap<String, CorpusEntry>,
}

impl Corpus {
    pub fn new() -> Self {
        Corpus::default()
    }

    /// Adds a sign under its own `sign_id`, storing its derived components.
    pub fn insert(&mut self, sign: Sign) -> Result<(), StatsError> {
        let id = sign.sign_id().to_owned();
        if self.signs.contains_key(&id) {
            return Err(StatsError::DuplicateSign(id));
        }
        let components = sign.components();
        self.signs.insert(id, CorpusEntry { sign, components });
        Ok(())
    }

    pub fn from_signs(signs: impl IntoIterator<Item = Sign>) -> Result<Corpus, StatsError> {
        let mut corpus = Corpus::new();
        for sign in signs {
            corpus.insert(sign)?;
        }
        Ok(corpus)
    }

    /// Loads every `*.sign.json` file in `dir`. A file whose stored
    /// component list disagrees with its placements is rejected.
    pub fn load_dir(dir: &Path) -> Result<Corpus, StatsError> {
        let io_err = |path: &Path| {
            let path = path.to_owned();
            move |source| StatsError::Io { path, source }
        };
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(io_err(dir))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| {
                p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.ends_with(SIGN_FILE_SUFFIX))
            })
            .collect();
        paths.sort();

        let mut corpus = Corpus::new();
        for path in paths {
            let text = fs::read_to_string(&path).map_err(io_err(&path))?;
            let sign = Sign::parse(&text).map_err(|source| StatsError::BadSignFile {
                path: path.clone(),
                source,
            })?;
            corpus.insert(sign)?;
        }
        Ok(corpus)
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn get(&self, sign_id: &str) -> Option<&CorpusEntry> {
        self.signs.get(sign_id)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &CorpusEntry)> {
        self.signs.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn total_placements(&self) -> u64 {
        self.signs.values().map(|e| e.components.total()).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FrequencyTable {
    /// Token count over all placements.
    pub by_code: BTreeMap<GlyphCode, u64>,
    /// Number of distinct signs containing the code.
    pub by_code_signwise: BTreeMap<GlyphCode, u64>,
}

/// Sign-level co-occurrence of distinct codes. Keys are stored with the
/// smaller code first; pairs that never co-occur are absent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CooccurrenceTable {
    pairs: BTreeMap<(GlyphCode, GlyphCode), u64>,
}

impl CooccurrenceTable {
    pub fn get(&self, a: &GlyphCode, b: &GlyphCode) -> u64 {
        let key = if a <= b { (*a, *b) } else { (*b, *a) };
        self.pairs.get(&key).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GlyphCode, &GlyphCode, u64)> {
        self.pairs.iter().map(|((a, b), n)| (a, b, *n))
    }
}

impl Serialize for CooccurrenceTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Pair<'a> {
            a: &'a GlyphCode,
            b: &'a GlyphCode,
            signs: u64,
        }
        #[derive(Serialize)]
        struct Table<'a> {
            pairs: Vec<Pair<'a>>,
        }
        Table {
            pairs: self.iter().map(|(a, b, signs)| Pair { a, b, signs }).collect(),
        }
        .serialize(serializer)
    }
}

pub fn frequency(corpus: &Corpus) -> FrequencyTable {
    let mut table = FrequencyTable::default();
    for entry in corpus.signs.values() {
        for (code, n) in entry.components.iter() {
            *table.by_code.entry(*code).or_default() += u64::from(n);
            *table.by_code_signwise.entry(*code).or_default() += 1;
        }
    }
    table
}

pub fn cooccurrence(corpus: &Corpus) -> CooccurrenceTable {
    let mut pairs = BTreeMap::new();
    for entry in corpus.signs.values() {
        // component codes iterate in ascending order
        let codes: Vec<&GlyphCode> = entry.components.codes().collect();
        for (i, a) in codes.iter().enumerate() {
            for b in &codes[i + 1..] {
                *pairs.entry((**a, **b)).or_default() += 1;
            }
        }
    }
    CooccurrenceTable { pairs }
}

/// Token counts per glyph role; every role is present, zero if unused.
pub fn category_distribution(corpus: &Corpus, catalog: &Catalog) -> Result<BTreeMap<GlyphRole, u64>, StatsError> {
    let mut out: BTreeMap<GlyphRole, u64> = GlyphRole::ALL.iter().map(|r| (*r, 0)).collect();
    for (id, entry) in &corpus.signs {
        for (code, n) in entry.components.iter() {
            let role = catalog
                .contains(code)
                .then(|| catalog.role_of(code))
                .flatten()
                .ok_or_else(|| StatsError::UnknownCode {
                    sign_id: id.clone(),
                    code: *code,
                })?;
            *out.entry(role).or_default() += u64::from(n);
        }
    }
    Ok(out)
}

/// Ids of signs containing every code of `pattern` at least once,
/// ascending.
pub fn find_signs_with(corpus: &Corpus, pattern: &BTreeSet<GlyphCode>) -> Result<Vec<String>, StatsError> {
    if pattern.is_empty() {
        return Err(StatsError::EmptyPattern);
    }
    Ok(corpus
        .signs
        .iter()
        .filter(|(_, e)| pattern.iter().all(|c| e.components.contains(c)))
        .map(|(id, _)| id.clone())
        .collect())
}
