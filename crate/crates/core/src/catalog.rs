//! The coded glyph inventory.
//!
//! A catalog is stored as a UTF-8 JSON-lines manifest: one header object
//! (`version_tag`, `role_map`, `label_dictionaries`, `facet_schema`)
//! followed by one object per glyph (`code`, `labels`, `image_ref`,
//! `width_px`, `height_px`, `facet_attrs`). Blank lines are ignored.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Component, Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code::{CodeField, GlyphCode};
use crate::facet::FacetSchema;

/// Body part a glyph writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlyphRole {
    FacialExpression,
    Shoulders,
    HandConfiguration,
    Contact,
    Movement,
}

impl GlyphRole {
    pub const ALL: [GlyphRole; 5] = [
        GlyphRole::FacialExpression,
        GlyphRole::Shoulders,
        GlyphRole::HandConfiguration,
        GlyphRole::Contact,
        GlyphRole::Movement,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            GlyphRole::FacialExpression => "facial_expression",
            GlyphRole::Shoulders => "shoulders",
            GlyphRole::HandConfiguration => "hand_configuration",
            GlyphRole::Contact => "contact",
            GlyphRole::Movement => "movement",
        }
    }

    /// Conventional highlight colour (RGB) used when teaching the notation;
    /// written material is normally monochrome.
    pub const fn teaching_color(self) -> [u8; 3] {
        match self {
            GlyphRole::FacialExpression => [0x2e, 0x9e, 0x3f],
            GlyphRole::Shoulders => [0xd6, 0x27, 0x28],
            GlyphRole::HandConfiguration => [0x00, 0x00, 0x00],
            GlyphRole::Contact => [0x1f, 0x5f, 0xd6],
            GlyphRole::Movement => [0xe3, 0x5d, 0xae],
        }
    }
}

impl fmt::Display for GlyphRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Glyph {
    pub code: GlyphCode,
    #[serde(default)]
    pub labels: Vec<String>,
    /// Path of the raster image, relative to the manifest's directory.
    pub image_ref: String,
    pub width_px: u32,
    pub height_px: u32,
    #[serde(default)]
    pub facet_attrs: BTreeMap<String, String>,
}

pub type LabelDictionaries = BTreeMap<CodeField, BTreeMap<u16, String>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestHeader {
    pub version_tag: String,
    pub role_map: BTreeMap<u8, GlyphRole>,
    #[serde(default)]
    pub label_dictionaries: LabelDictionaries,
    #[serde(default)]
    pub facet_schema: FacetSchema,
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("catalog has no glyph rows")]
    EmptyCatalog,
    #[error("duplicate glyph code {code}{}", line_suffix(*.line))]
    DuplicateCode { code: GlyphCode, line: Option<usize> },
    #[error("schema error{}: {detail}", line_suffix(*.line))]
    SchemaError { line: Option<usize>, detail: String },
    #[error("malformed row{}: {detail}", line_suffix(*.line))]
    MalformedRow { line: Option<usize>, detail: String },
    #[error("glyph {0} not found")]
    NotFound(GlyphCode),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

fn line_suffix(line: Option<usize>) -> String {
    line.map(|l| format!(" at line {l}")).unwrap_or_default()
}

impl CatalogError {
    fn at_line(self, n: usize) -> Self {
        match self {
            CatalogError::DuplicateCode { code, .. } => CatalogError::DuplicateCode { code, line: Some(n) },
            CatalogError::SchemaError { detail, .. } => CatalogError::SchemaError { line: Some(n), detail },
            CatalogError::MalformedRow { detail, .. } => CatalogError::MalformedRow { line: Some(n), detail },
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LoadWarning {
    MissingImage {
        code: GlyphCode,
        path: String,
    },
    UnreadableImage {
        code: GlyphCode,
        path: String,
        detail: String,
    },
    DimensionMismatch {
        code: GlyphCode,
        path: String,
        declared: (u32, u32),
        actual: (u32, u32),
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub version_tag: String,
    pub glyphs: usize,
    pub roles_present: BTreeSet<GlyphRole>,
    pub warnings: Vec<LoadWarning>,
}

/// An immutable, validated glyph inventory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    header: ManifestHeader,
    glyphs: BTreeMap<GlyphCode, Glyph>,
}

impl Catalog {
    pub fn new(header: ManifestHeader, glyphs: impl IntoIterator<Item = Glyph>) -> Result<Catalog, CatalogError> {
        let mut builder = Builder::new(header)?;
        for glyph in glyphs {
            builder.push(glyph)?;
        }
        builder.finish()
    }

    /// A catalog with no glyphs. Manifests may not be empty; this exists for
    /// audits and tests that need the empty case.
    pub fn empty(header: ManifestHeader) -> Result<Catalog, CatalogError> {
        let builder = Builder::new(header)?;
        Ok(Catalog {
            header: builder.header,
            glyphs: BTreeMap::new(),
        })
    }

    pub fn version_tag(&self) -> &str {
        &self.header.version_tag
    }

    pub fn header(&self) -> &ManifestHeader {
        &self.header
    }

    pub fn role_map(&self) -> &BTreeMap<u8, GlyphRole> {
        &self.header.role_map
    }

    pub fn label_dictionaries(&self) -> &LabelDictionaries {
        &self.header.label_dictionaries
    }

    pub fn facet_schema(&self) -> &FacetSchema {
        &self.header.facet_schema
    }

    pub fn len(&self) -> usize {
        self.glyphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.glyphs.is_empty()
    }

    /// Glyphs in ascending code order.
    pub fn glyphs(&self) -> impl ExactSizeIterator<Item = &Glyph> {
        self.glyphs.values()
    }

    pub fn contains(&self, code: &GlyphCode) -> bool {
        self.glyphs.contains_key(code)
    }

    pub fn get_glyph(&self, code: &GlyphCode) -> Result<&Glyph, CatalogError> {
        self.glyphs.get(code).ok_or(CatalogError::NotFound(*code))
    }

    pub fn role_of(&self, code: &GlyphCode) -> Option<GlyphRole> {
        self.header.role_map.get(&code.category()).copied()
    }

    pub fn roles_present(&self) -> BTreeSet<GlyphRole> {
        self.glyphs.keys().filter_map(|c| self.role_of(c)).collect()
    }

    /// Dictionary labels for each numeric component of `code` that has one.
    pub fn field_labels(&self, code: &GlyphCode) -> BTreeMap<CodeField, &str> {
        CodeField::ALL
            .iter()
            .filter_map(|f| {
                self.header
                    .label_dictionaries
                    .get(f)
                    .and_then(|d| d.get(&code.field(*f)))
                    .map(|label| (*f, label.as_str()))
            })
            .collect()
    }

    /// Writes the catalog as a manifest, rows in code order.
    pub fn write_manifest(&self, mut out: impl Write) -> io::Result<()> {
        serde_json::to_writer(&mut out, &self.header)?;
        out.write_all(b"\n")?;
        for glyph in self.glyphs.values() {
            serde_json::to_writer(&mut out, glyph)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }
}

struct Builder {
    header: ManifestHeader,
    glyphs: BTreeMap<GlyphCode, Glyph>,
}

impl Builder {
    fn new(header: ManifestHeader) -> Result<Self, CatalogError> {
        header.facet_schema.validate().map_err(|e| CatalogError::SchemaError {
            line: None,
            detail: e.to_string(),
        })?;
        if let Some((field, _)) = header
            .label_dictionaries
            .iter()
            .find(|(f, d)| d.keys().any(|k| *k == 0 || *k > f.max_value()))
        {
            return Err(CatalogError::SchemaError {
                line: None,
                detail: format!("{field} label dictionary has a key outside 1..={}", field.max_value()),
            });
        }
        if let Some(cat) = header.role_map.keys().find(|c| **c == 0 || **c > 99) {
            return Err(CatalogError::SchemaError {
                line: None,
                detail: format!("role_map category {cat} outside 1..=99"),
            });
        }
        Ok(Builder {
            header,
            glyphs: BTreeMap::new(),
        })
    }

    fn push(&mut self, glyph: Glyph) -> Result<(), CatalogError> {
        let malformed = |detail: String| CatalogError::MalformedRow { line: None, detail };
        if glyph.width_px == 0 || glyph.height_px == 0 {
            return Err(malformed(format!("glyph {} has a zero dimension", glyph.code)));
        }
        check_image_ref(&glyph.image_ref).map_err(|d| malformed(format!("glyph {}: {d}", glyph.code)))?;

        let Some(role) = self.header.role_map.get(&glyph.code.category()).copied() else {
            return Err(CatalogError::SchemaError {
                line: None,
                detail: format!(
                    "category {} of glyph {} is not in role_map",
                    glyph.code.category(),
                    glyph.code
                ),
            });
        };
        self.header
            .facet_schema
            .check_attrs(role, &glyph.facet_attrs)
            .map_err(|d| CatalogError::SchemaError {
                line: None,
                detail: format!("glyph {}: {d}", glyph.code),
            })?;

        if self.glyphs.contains_key(&glyph.code) {
            return Err(CatalogError::DuplicateCode {
                code: glyph.code,
                line: None,
            });
        }
        self.glyphs.insert(glyph.code, glyph);
        Ok(())
    }

    fn finish(self) -> Result<Catalog, CatalogError> {
        if self.glyphs.is_empty() {
            return Err(CatalogError::EmptyCatalog);
        }
        Ok(Catalog {
            header: self.header,
            glyphs: self.glyphs,
        })
    }
}

fn check_image_ref(image_ref: &str) -> Result<(), String> {
    let path = Path::new(image_ref);
    if image_ref.is_empty() {
        return Err("empty image_ref".into());
    }
    if !path
        .components()
        .all(|c| matches!(c, Component::Normal(_) | Component::CurDir))
    {
        return Err(format!(
            "image_ref {image_ref:?} must be a relative path inside the manifest directory"
        ));
    }
    Ok(())
}

/// Loads and validates a manifest. Image files are resolved relative to
/// the manifest's directory; problems with them are reported as warnings
/// and never drop a glyph.
pub fn load_catalog(manifest: &Path) -> Result<(Catalog, LoadReport), CatalogError> {
    let io_err = |source| CatalogError::Io {
        path: manifest.to_owned(),
        source,
    };
    let file = File::open(manifest).map_err(io_err)?;
    let catalog = read_manifest(BufReader::new(file)).map_err(|e| match e {
        CatalogError::Io { source, .. } => io_err(source),
        other => other,
    })?;
    let root = manifest.parent().unwrap_or_else(|| Path::new("."));
    let report = inspect_images(&catalog, root);
    Ok((catalog, report))
}

/// Parses a manifest stream without touching image files.
pub fn read_manifest(reader: impl BufRead) -> Result<Catalog, CatalogError> {
    let mut builder: Option<Builder> = None;
    for (i, line) in reader.lines().enumerate() {
        let n = i + 1;
        let line = line.map_err(|source| CatalogError::Io {
            path: PathBuf::new(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        match builder.as_mut() {
            None => {
                let header: ManifestHeader = serde_json::from_str(&line).map_err(|e| CatalogError::MalformedRow {
                    line: Some(n),
                    detail: format!("header: {e}"),
                })?;
                builder = Some(Builder::new(header).map_err(|e| e.at_line(n))?);
            }
            Some(b) => {
                let glyph: Glyph = serde_json::from_str(&line).map_err(|e| CatalogError::MalformedRow {
                    line: Some(n),
                    detail: e.to_string(),
                })?;
                b.push(glyph).map_err(|e| e.at_line(n))?;
            }
        }
    }
    builder.ok_or(CatalogError::EmptyCatalog)?.finish()
}

/// Checks every glyph's image against its declared dimensions.
pub fn inspect_images(catalog: &Catalog, root: &Path) -> LoadReport {
    let mut warnings = Vec::new();
    for glyph in catalog.glyphs() {
        let path = root.join(&glyph.image_ref);
        if !path.is_file() {
            warnings.push(LoadWarning::MissingImage {
                code: glyph.code,
                path: glyph.image_ref.clone(),
            });
            continue;
        }
        match image::image_dimensions(&path) {
            Ok(actual) if actual == (glyph.width_px, glyph.height_px) => {}
            Ok(actual) => warnings.push(LoadWarning::DimensionMismatch {
                code: glyph.code,
                path: glyph.image_ref.clone(),
                declared: (glyph.width_px, glyph.height_px),
                actual,
            }),
            Err(e) => warnings.push(LoadWarning::UnreadableImage {
                code: glyph.code,
                path: glyph.image_ref.clone(),
                detail: e.to_string(),
            }),
        }
    }
    LoadReport {
        version_tag: catalog.version_tag().to_owned(),
        glyphs: catalog.len(),
        roles_present: catalog.roles_present(),
        warnings,
    }
}
