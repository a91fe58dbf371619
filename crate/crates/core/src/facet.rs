//! Progressive faceted glyph search.
//!
//! A search starts from a body area (one per glyph role) and narrows the
//! available glyphs through feature boxes. Each box holds at most one
//! choice; choosing again in the same box replaces the previous option.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, GlyphRole};
use crate::code::GlyphCode;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FacetError {
    #[error("unknown area {0:?}")]
    UnknownArea(String),
    #[error("area {area:?} has no box {name:?}")]
    UnknownBox { area: String, name: String },
    #[error("box {name:?} has no option {option:?}")]
    UnknownOption { name: String, option: String },
    #[error("glyph {code} does not match the facet schema: {detail}")]
    SchemaMismatch { code: GlyphCode, detail: String },
    #[error("invalid facet schema: {0}")]
    InvalidSchema(String),
}

/// A single-choice feature selector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacetBox {
    pub name: String,
    pub options: Vec<String>,
}

impl FacetBox {
    pub fn new(name: impl Into<String>, options: impl IntoIterator<Item = impl Into<String>>) -> Self {
        FacetBox {
            name: name.into(),
            options: options.into_iter().map(Into::into).collect(),
        }
    }

    pub fn has_option(&self, option: &str) -> bool {
        self.options.iter().any(|o| o == option)
    }
}

/// A searchable body area and the glyph role it draws from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacetArea {
    pub name: String,
    pub role: GlyphRole,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacetSchema {
    pub areas: Vec<FacetArea>,
    #[serde(default)]
    pub boxes: BTreeMap<String, Vec<FacetBox>>,
}

impl FacetSchema {
    pub fn validate(&self) -> Result<(), FacetError> {
        let invalid = |msg: String| Err(FacetError::InvalidSchema(msg));

        let mut names = BTreeSet::new();
        let mut roles = BTreeSet::new();
        for area in &self.areas {
            if !names.insert(area.name.as_str()) {
                return invalid(format!("duplicate area {:?}", area.name));
            }
            if !roles.insert(area.role) {
                return invalid(format!("role {} has more than one area", area.role));
            }
        }
        for (area, boxes) in &self.boxes {
            if !names.contains(area.as_str()) {
                return invalid(format!("boxes declared for unknown area {area:?}"));
            }
            let mut seen = BTreeSet::new();
            for b in boxes {
                if !seen.insert(b.name.as_str()) {
                    return invalid(format!("duplicate box {:?} in area {area:?}", b.name));
                }
                let mut opts = BTreeSet::new();
                if let Some(dup) = b.options.iter().find(|o| !opts.insert(o.as_str())) {
                    return invalid(format!("duplicate option {dup:?} in box {:?}", b.name));
                }
            }
        }
        Ok(())
    }

    pub fn area(&self, name: &str) -> Option<&FacetArea> {
        self.areas.iter().find(|a| a.name == name)
    }

    pub fn area_for_role(&self, role: GlyphRole) -> Option<&FacetArea> {
        self.areas.iter().find(|a| a.role == role)
    }

    pub fn boxes(&self, area: &str) -> &[FacetBox] {
        self.boxes.get(area).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn facet_box(&self, area: &str, name: &str) -> Option<&FacetBox> {
        self.boxes(area).iter().find(|b| b.name == name)
    }

    /// Checks a glyph's attributes against the boxes of the area serving
    /// `role`.
    pub fn check_attrs(&self, role: GlyphRole, attrs: &BTreeMap<String, String>) -> Result<(), String> {
        if attrs.is_empty() {
            return Ok(());
        }
        let Some(area) = self.area_for_role(role) else {
            return Err(format!(
                "role {role} has no search area but the glyph carries facet attributes"
            ));
        };
        for (name, option) in attrs {
            match self.facet_box(&area.name, name) {
                None => return Err(format!("area {:?} has no box {name:?}", area.name)),
                Some(b) if !b.has_option(option) => return Err(format!("box {name:?} has no option {option:?}")),
                Some(_) => {}
            }
        }
        Ok(())
    }

    /// Starts an empty selection in `area`.
    pub fn start(&self, area: &str) -> Result<SelectionState, FacetError> {
        self.area(area)
            .map(|a| SelectionState {
                area: a.name.clone(),
                choices: BTreeMap::new(),
            })
            .ok_or_else(|| FacetError::UnknownArea(area.to_owned()))
    }

    /// Checks that every choice of `state` names a box of its area and an
    /// option of that box.
    pub fn validate_state(&self, state: &SelectionState) -> Result<(), FacetError> {
        if self.area(&state.area).is_none() {
            return Err(FacetError::UnknownArea(state.area.clone()));
        }
        for (name, option) in &state.choices {
            self.check_choice(&state.area, name, option)?;
        }
        Ok(())
    }

    fn check_choice(&self, area: &str, name: &str, option: &str) -> Result<(), FacetError> {
        let b = self.facet_box(area, name).ok_or_else(|| FacetError::UnknownBox {
            area: area.to_owned(),
            name: name.to_owned(),
        })?;
        if !b.has_option(option) {
            return Err(FacetError::UnknownOption {
                name: name.to_owned(),
                option: option.to_owned(),
            });
        }
        Ok(())
    }
}

/// The user's current position in a search: one area and at most one option
/// per box (enforced structurally by the map).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionState {
    pub area: String,
    pub choices: BTreeMap<String, String>,
}

impl SelectionState {
    /// Returns a new state with `choices[name] = option`, replacing any
    /// previous choice in that box.
    pub fn select(&self, schema: &FacetSchema, name: &str, option: &str) -> Result<SelectionState, FacetError> {
        schema.check_choice(&self.area, name, option)?;
        let mut next = self.clone();
        next.choices.insert(name.to_owned(), option.to_owned());
        Ok(next)
    }

    pub fn clear(&self, name: &str) -> SelectionState {
        let mut next = self.clone();
        next.choices.remove(name);
        next
    }
}

#[derive(Debug, Clone, Default)]
struct AreaIndex {
    universe: Vec<GlyphCode>,
    // box -> option -> sorted codes
    postings: HashMap<String, HashMap<String, Vec<GlyphCode>>>,
}

/// Inverted index from (area, box, option) to sorted glyph code lists.
#[derive(Debug, Clone)]
pub struct FacetIndex {
    schema: FacetSchema,
    areas: HashMap<String, AreaIndex>,
}

impl FacetIndex {
    pub fn build(catalog: &Catalog) -> Result<FacetIndex, FacetError> {
        FacetIndex::build_with(catalog, catalog.facet_schema().clone())
    }

    /// Indexes `catalog` against a schema other than the one in its
    /// manifest, e.g. a narrower box inventory for a particular editor.
    pub fn build_with(catalog: &Catalog, schema: FacetSchema) -> Result<FacetIndex, FacetError> {
        schema.validate()?;

        let mut areas: HashMap<String, AreaIndex> = schema
            .areas
            .iter()
            .map(|a| (a.name.clone(), AreaIndex::default()))
            .collect();

        // catalog iteration is in code order, so every list below is sorted
        for glyph in catalog.glyphs() {
            let role = catalog.role_of(&glyph.code).ok_or_else(|| FacetError::SchemaMismatch {
                code: glyph.code,
                detail: format!("category {} has no role", glyph.code.category()),
            })?;
            schema
                .check_attrs(role, &glyph.facet_attrs)
                .map_err(|detail| FacetError::SchemaMismatch {
                    code: glyph.code,
                    detail,
                })?;
            let Some(area) = schema.area_for_role(role) else {
                continue;
            };
            let idx = areas.get_mut(&area.name).expect("area registered above");
            idx.universe.push(glyph.code);
            for (name, option) in &glyph.facet_attrs {
                idx.postings
                    .entry(name.clone())
                    .or_default()
                    .entry(option.clone())
                    .or_default()
                    .push(glyph.code);
            }
        }

        Ok(FacetIndex { schema, areas })
    }

    pub fn schema(&self) -> &FacetSchema {
        &self.schema
    }

    /// All glyph codes of an area, ascending.
    pub fn universe(&self, area: &str) -> Option<&[GlyphCode]> {
        self.areas.get(area).map(|a| a.universe.as_slice())
    }

    /// Codes posted under one (box, option) pair, ascending.
    pub fn postings(&self, area: &str, name: &str, option: &str) -> &[GlyphCode] {
        self.areas
            .get(area)
            .and_then(|a| a.postings.get(name))
            .and_then(|p| p.get(option))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Glyphs matching every choice of `state`, ascending by canonical code.
    /// An empty intersection is a legal result.
    pub fn query(&self, state: &SelectionState) -> Result<Vec<GlyphCode>, FacetError> {
        self.schema.validate_state(state)?;
        Ok(self.query_unchecked(state))
    }

    fn query_unchecked(&self, state: &SelectionState) -> Vec<GlyphCode> {
        let Some(area) = self.areas.get(&state.area) else {
            return Vec::new();
        };
        let mut lists: Vec<&[GlyphCode]> = state
            .choices
            .iter()
            .map(|(name, option)| self.postings(&state.area, name, option))
            .collect();
        if lists.is_empty() {
            return area.universe.clone();
        }
        lists.sort_by_key(|l| l.len());
        let mut acc = lists[0].to_vec();
        for list in &lists[1..] {
            if acc.is_empty() {
                break;
            }
            acc = intersect_sorted(&acc, list);
        }
        acc
    }

    /// For each box of the state's area, the options that would leave a
    /// non-empty result. A box's own choice is ignored when evaluating that
    /// box, so the user can always switch options within it.
    pub fn available(&self, state: &SelectionState) -> Result<BTreeMap<String, Vec<String>>, FacetError> {
        self.schema.validate_state(state)?;
        let mut out = BTreeMap::new();
        for b in self.schema.boxes(&state.area) {
            let base = self.query_unchecked(&state.clear(&b.name));
            let options = b
                .options
                .iter()
                .filter(|o| {
                    let posted = self.postings(&state.area, &b.name, o);
                    !base.is_empty() && sorted_overlap(&base, posted)
                })
                .cloned()
                .collect();
            out.insert(b.name.clone(), options);
        }
        Ok(out)
    }
}

fn intersect_sorted(a: &[GlyphCode], b: &[GlyphCode]) -> Vec<GlyphCode> {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut out = Vec::with_capacity(small.len());
    let mut rest = large;
    for code in small {
        match rest.binary_search(code) {
            Ok(i) => {
                out.push(*code);
                rest = &rest[i + 1..];
            }
            Err(i) => rest = &rest[i..],
        }
        if rest.is_empty() {
            break;
        }
    }
    out
}

fn sorted_overlap(a: &[GlyphCode], b: &[GlyphCode]) -> bool {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small.iter().any(|c| large.binary_search(c).is_ok())
}
