//! Sign composition on a 2-D canvas and the sign file format.
//!
//! Coordinates are integer pixels of the glyph centre, origin at the top
//! left of the canvas, y increasing downward. Placements may overlap.
//!
//! A sign file is UTF-8 JSON with keys in this fixed order:
//!
//! ```text
//! {
//!   "format_version": 1,
//!   "sign_id": "",
//!   "canvas_width": 400,
//!   "canvas_height": 400,
//!   "label": null,
//!   "placements": [{"placement_id": 1, "code": "01-01-001-01-01-01", "x": 200, "y": 200}],
//!   "components": {"01-01-001-01-01-01": 1}
//! }
//! ```
//!
//! The canonical form is two-space indented with a trailing newline,
//! placements ascending by id and components ascending by code. The
//! `components` field must equal the multiset derived from `placements`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code::GlyphCode;

pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_CANVAS_WIDTH: u32 = 400;
pub const DEFAULT_CANVAS_HEIGHT: u32 = 400;

pub type PlacementId = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignError {
    #[error("canvas dimensions must be positive, got {width}x{height}")]
    BadDimensions { width: u32, height: u32 },
    #[error("position ({x}, {y}) is outside the {width}x{height} canvas")]
    OutOfBounds { x: i64, y: i64, width: u32, height: u32 },
    #[error("no placement with id {0}")]
    NoSuchPlacement(PlacementId),
    #[error("sign file does not parse: {0}")]
    Parse(String),
    #[error("sign file violates an invariant: {0}")]
    InvariantViolation(Violation),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    UnsupportedVersion(u32),
    BadCanvas {
        width: i64,
        height: i64,
    },
    ZeroPlacementId,
    DuplicatePlacementId(PlacementId),
    PlacementOutOfBounds {
        placement_id: PlacementId,
        x: i64,
        y: i64,
    },
    ZeroCount(GlyphCode),
    ComponentMismatch {
        stored: ComponentList,
        derived: ComponentList,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnsupportedVersion(v) => write!(f, "unsupported format_version {v}"),
            Violation::BadCanvas { width, height } => write!(f, "canvas {width}x{height} is not positive"),
            Violation::ZeroPlacementId => f.write_str("placement_id 0 is not allowed"),
            Violation::DuplicatePlacementId(id) => write!(f, "placement_id {id} is used twice"),
            Violation::PlacementOutOfBounds { placement_id, x, y } => {
                write!(f, "placement {placement_id} at ({x}, {y}) is outside the canvas")
            }
            Violation::ZeroCount(code) => write!(f, "component {code} has count 0"),
            Violation::ComponentMismatch { stored, derived } => write!(
                f,
                "stored components {} differ from placements {}",
                serde_json::to_string(stored).unwrap_or_default(),
                serde_json::to_string(derived).unwrap_or_default()
            ),
        }
    }
}

impl SignError {
    pub fn is_component_mismatch(&self) -> bool {
        matches!(self, SignError::InvariantViolation(Violation::ComponentMismatch { .. }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PositionedGlyph {
    pub placement_id: PlacementId,
    pub code: GlyphCode,
    pub x: u32,
    pub y: u32,
}

/// Multiset of glyph codes in a sign.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComponentList {
    counts: BTreeMap<GlyphCode, u32>,
}

impl ComponentList {
    pub fn get(&self, code: &GlyphCode) -> u32 {
        self.counts.get(code).copied().unwrap_or(0)
    }

    pub fn contains(&self, code: &GlyphCode) -> bool {
        self.counts.contains_key(code)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GlyphCode, u32)> {
        self.counts.iter().map(|(c, n)| (c, *n))
    }

    pub fn codes(&self) -> impl Iterator<Item = &GlyphCode> {
        self.counts.keys()
    }

    /// Number of distinct codes.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Sum of all counts.
    pub fn total(&self) -> u64 {
        self.counts.values().map(|n| u64::from(*n)).sum()
    }
}

impl FromIterator<GlyphCode> for ComponentList {
    fn from_iter<I: IntoIterator<Item = GlyphCode>>(iter: I) -> Self {
        let mut counts = BTreeMap::new();
        for code in iter {
            *counts.entry(code).or_insert(0) += 1;
        }
        ComponentList { counts }
    }
}

/// A composed sign. Editing operations return new values.
#[derive(Debug, Clone, Eq)]
pub struct Sign {
    sign_id: String,
    canvas_width: u32,
    canvas_height: u32,
    label: Option<String>,
    placements: Vec<PositionedGlyph>,
    format_version: u32,
    next_id: PlacementId,
}

// The id counter is bookkeeping; two signs with the same content are equal.
impl PartialEq for Sign {
    fn eq(&self, other: &Self) -> bool {
        self.sign_id == other.sign_id
            && self.canvas_width == other.canvas_width
            && self.canvas_height == other.canvas_height
            && self.label == other.label
            && self.placements == other.placements
            && self.format_version == other.format_version
    }
}

impl Sign {
    pub fn new(canvas_width: u32, canvas_height: u32) -> Result<Sign, SignError> {
        if canvas_width == 0 || canvas_height == 0 {
            return Err(SignError::BadDimensions {
                width: canvas_width,
                height: canvas_height,
            });
        }
        Ok(Sign {
            sign_id: String::new(),
            canvas_width,
            canvas_height,
            label: None,
            placements: Vec::new(),
            format_version: FORMAT_VERSION,
            next_id: 1,
        })
    }

    pub fn sign_id(&self) -> &str {
        &self.sign_id
    }

    pub fn canvas_width(&self) -> u32 {
        self.canvas_width
    }

    pub fn canvas_height(&self) -> u32 {
        self.canvas_height
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn format_version(&self) -> u32 {
        self.format_version
    }

    /// Placements ascending by id.
    pub fn placements(&self) -> &[PositionedGlyph] {
        &self.placements
    }

    pub fn placement(&self, id: PlacementId) -> Option<&PositionedGlyph> {
        self.index_of(id).map(|i| &self.placements[i])
    }

    /// The id the next `place` will assign.
    pub fn next_placement_id(&self) -> PlacementId {
        self.next_id
    }

    pub(crate) fn placements_mut(&mut self) -> &mut [PositionedGlyph] {
        &mut self.placements
    }

    pub fn with_sign_id(&self, sign_id: impl Into<String>) -> Sign {
        Sign {
            sign_id: sign_id.into(),
            ..self.clone()
        }
    }

    pub fn with_label(&self, label: Option<String>) -> Sign {
        Sign { label, ..self.clone() }
    }

    fn check_bounds(&self, x: i64, y: i64) -> Result<(u32, u32), SignError> {
        if (0..=i64::from(self.canvas_width)).contains(&x) && (0..=i64::from(self.canvas_height)).contains(&y) {
            Ok((x as u32, y as u32))
        } else {
            Err(SignError::OutOfBounds {
                x,
                y,
                width: self.canvas_width,
                height: self.canvas_height,
            })
        }
    }

    fn index_of(&self, id: PlacementId) -> Option<usize> {
        self.placements.binary_search_by_key(&id, |p| p.placement_id).ok()
    }

    /// Adds a glyph centred at (x, y) and returns the new sign with the
    /// assigned placement id.
    pub fn place(&self, code: GlyphCode, x: i64, y: i64) -> Result<(Sign, PlacementId), SignError> {
        let (x, y) = self.check_bounds(x, y)?;
        let id = self.next_id;
        let mut next = self.clone();
        next.placements.push(PositionedGlyph {
            placement_id: id,
            code,
            x,
            y,
        });
        next.next_id = id + 1;
        Ok((next, id))
    }

    pub fn move_placement(&self, id: PlacementId, x: i64, y: i64) -> Result<Sign, SignError> {
        let i = self.index_of(id).ok_or(SignError::NoSuchPlacement(id))?;
        let (x, y) = self.check_bounds(x, y)?;
        let mut next = self.clone();
        next.placements[i].x = x;
        next.placements[i].y = y;
        Ok(next)
    }

    pub fn remove(&self, id: PlacementId) -> Result<Sign, SignError> {
        let i = self.index_of(id).ok_or(SignError::NoSuchPlacement(id))?;
        let mut next = self.clone();
        next.placements.remove(i);
        Ok(next)
    }

    pub fn components(&self) -> ComponentList {
        self.placements.iter().map(|p| p.code).collect()
    }

    /// Canonical sign file text.
    pub fn serialize(&self) -> String {
        let file = SignFileOut {
            format_version: self.format_version,
            sign_id: &self.sign_id,
            canvas_width: self.canvas_width,
            canvas_height: self.canvas_height,
            label: self.label.as_deref(),
            placements: &self.placements,
            components: self.components(),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("sign serializes");
        text.push('\n');
        text
    }

    /// Parses and validates a sign file. Placements may appear in any order;
    /// they are sorted by id.
    pub fn parse(text: &str) -> Result<Sign, SignError> {
        let file: SignFileIn = serde_json::from_str(text).map_err(|e| SignError::Parse(e.to_string()))?;
        let violation = |v| Err(SignError::InvariantViolation(v));

        if file.format_version != FORMAT_VERSION {
            return violation(Violation::UnsupportedVersion(file.format_version));
        }
        let (Ok(width), Ok(height)) = (u32::try_from(file.canvas_width), u32::try_from(file.canvas_height)) else {
            return violation(Violation::BadCanvas {
                width: file.canvas_width,
                height: file.canvas_height,
            });
        };
        if width == 0 || height == 0 {
            return violation(Violation::BadCanvas {
                width: file.canvas_width,
                height: file.canvas_height,
            });
        }

        let mut seen = BTreeSet::new();
        let mut placements = Vec::with_capacity(file.placements.len());
        for p in file.placements {
            if p.placement_id == 0 {
                return violation(Violation::ZeroPlacementId);
            }
            if !seen.insert(p.placement_id) {
                return violation(Violation::DuplicatePlacementId(p.placement_id));
            }
            let in_bounds = (0..=i64::from(width)).contains(&p.x) && (0..=i64::from(height)).contains(&p.y);
            if !in_bounds {
                return violation(Violation::PlacementOutOfBounds {
                    placement_id: p.placement_id,
                    x: p.x,
                    y: p.y,
                });
            }
            placements.push(PositionedGlyph {
                placement_id: p.placement_id,
                code: p.code,
                x: p.x as u32,
                y: p.y as u32,
            });
        }
        placements.sort_by_key(|p| p.placement_id);

        if let Some((code, _)) = file.components.iter().find(|(_, n)| **n == 0) {
            return violation(Violation::ZeroCount(*code));
        }
        let next_id = placements.last().map_or(1, |p| p.placement_id + 1);
        let sign = Sign {
            sign_id: file.sign_id,
            canvas_width: width,
            canvas_height: height,
            label: file.label,
            placements,
            format_version: file.format_version,
            next_id,
        };
        let stored = ComponentList {
            counts: file.components,
        };
        let derived = sign.components();
        if stored != derived {
            return violation(Violation::ComponentMismatch { stored, derived });
        }
        Ok(sign)
    }
}

#[derive(Serialize)]
struct SignFileOut<'a> {
    format_version: u32,
    sign_id: &'a str,
    canvas_width: u32,
    canvas_height: u32,
    label: Option<&'a str>,
    placements: &'a [PositionedGlyph],
    components: ComponentList,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SignFileIn {
    format_version: u32,
    sign_id: String,
    canvas_width: i64,
    canvas_height: i64,
    #[serde(default)]
    label: Option<String>,
    placements: Vec<PlacementIn>,
    components: BTreeMap<GlyphCode, u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlacementIn {
    placement_id: PlacementId,
    code: GlyphCode,
    x: i64,
    y: i64,
}
