//! Deterministic catalogs for tests, demos and benchmarks.
//!
//! `DF-1` is a 24-glyph desk fixture covering all five roles:
//!
//! * category 01, hand configuration: families {01, 02} x bases
//!   {001, 002, 003} x fills {01, 02}; `fingers` is the base number and
//!   `side` is `palm` for fill 01, `back` for fill 02.
//! * category 02, movement: family 01 x bases {001..004} x rotations
//!   {01, 02}; `direction` is `up` for rotation 01, `down` for 02.
//! * category 03, contact: `03-01-001-01-01-01`.
//! * category 04, facial expression: bases {001, 002}.
//! * category 05, shoulders: `05-01-001-01-01-01`.
//!
//! The synthetic generator produces catalogs of arbitrary size with the
//! same five roles and a richer facet schema.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::{self, File};
use std::io::{self, BufWriter};
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::{Catalog, Glyph, GlyphRole, ManifestHeader};
use crate::classification::{ClassificationSchema, FamilyKey, Prototype, RuleSpec};
use crate::code::{CodeField, GlyphCode};
use crate::facet::{FacetArea, FacetBox, FacetSchema};

pub const DF1_VERSION: &str = "DF-1";
pub const GLYPH_IMAGE_PX: u32 = 32;

const ROLES: [(u8, GlyphRole, &str); 5] = [
    (1, GlyphRole::HandConfiguration, "hand"),
    (2, GlyphRole::Movement, "movement"),
    (3, GlyphRole::Contact, "contact"),
    (4, GlyphRole::FacialExpression, "face"),
    (5, GlyphRole::Shoulders, "shoulders"),
];

fn code(c: u32, f: u32, b: u32, v: u32, l: u32, r: u32) -> GlyphCode {
    GlyphCode::new(c, f, b, v, l, r).expect("fixture codes are in range")
}

fn image_ref(code: &GlyphCode) -> String {
    format!("images/{code}.png")
}

fn glyph(code: GlyphCode, labels: &[&str], attrs: &[(&str, String)]) -> Glyph {
    Glyph {
        code,
        labels: labels.iter().map(|s| s.to_string()).collect(),
        image_ref: image_ref(&code),
        width_px: GLYPH_IMAGE_PX,
        height_px: GLYPH_IMAGE_PX,
        facet_attrs: attrs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
    }
}

fn base_header(version_tag: &str, facet_schema: FacetSchema) -> ManifestHeader {
    ManifestHeader {
        version_tag: version_tag.to_owned(),
        role_map: ROLES.iter().map(|(c, r, _)| (*c, *r)).collect(),
        label_dictionaries: BTreeMap::from([(
            CodeField::Category,
            ROLES
                .iter()
                .map(|(c, _, name)| (u16::from(*c), name.to_string()))
                .collect(),
        )]),
        facet_schema,
    }
}

fn areas() -> Vec<FacetArea> {
    ROLES
        .iter()
        .map(|(_, role, name)| FacetArea {
            name: name.to_string(),
            role: *role,
        })
        .collect()
}

pub fn df1_facet_schema() -> FacetSchema {
    FacetSchema {
        areas: areas(),
        boxes: BTreeMap::from([
            (
                "hand".to_owned(),
                vec![
                    FacetBox::new("fingers", ["1", "2", "3"]),
                    FacetBox::new("side", ["palm", "back"]),
                ],
            ),
            ("movement".to_owned(), vec![FacetBox::new("direction", ["up", "down"])]),
        ]),
    }
}

pub fn df1_glyphs() -> Vec<Glyph> {
    let mut out = Vec::new();
    for family in 1..=2 {
        for base in 1..=3 {
            for fill in 1..=2 {
                let side = if fill == 1 { "palm" } else { "back" };
                let fingers = base.to_string();
                out.push(glyph(
                    code(1, family, base, 1, fill, 1),
                    &["hand", &format!("fingers:{fingers}"), side],
                    &[("fingers", fingers.clone()), ("side", side.to_owned())],
                ));
            }
        }
    }
    for base in 1..=4 {
        for rotation in 1..=2 {
            let direction = if rotation == 1 { "up" } else { "down" };
            out.push(glyph(
                code(2, 1, base, 1, 1, rotation),
                &["movement", direction],
                &[("direction", direction.to_owned())],
            ));
        }
    }
    out.push(glyph(code(3, 1, 1, 1, 1, 1), &["contact", "touch"], &[]));
    out.push(glyph(code(4, 1, 1, 1, 1, 1), &["face", "smile"], &[]));
    out.push(glyph(code(4, 1, 2, 1, 1, 1), &["face", "frown"], &[]));
    out.push(glyph(code(5, 1, 1, 1, 1, 1), &["shoulders", "level"], &[]));
    out
}

pub fn df1_catalog() -> Catalog {
    Catalog::new(base_header(DF1_VERSION, df1_facet_schema()), df1_glyphs()).expect("DF-1 is valid")
}

pub fn df1_schema() -> ClassificationSchema {
    let mut prototypes = Vec::new();
    let mut proto = |category: u8, family: u8, base: u16| {
        prototypes.push(Prototype {
            id: format!("{category:02}-{family:02}-{base:03}"),
            category,
            family,
            sub_family: 1,
            base,
        })
    };
    for family in 1..=2 {
        for base in 1..=3 {
            proto(1, family, base);
        }
    }
    for base in 1..=4 {
        proto(2, 1, base);
    }
    proto(3, 1, 1);
    proto(4, 1, 1);
    proto(4, 1, 2);
    proto(5, 1, 1);

    let rules = vec![
        RuleSpec {
            name: "side".into(),
            domain: vec!["palm".into(), "back".into()],
            applies_to: BTreeSet::from([
                FamilyKey { category: 1, family: 1 },
                FamilyKey { category: 1, family: 2 },
            ]),
        },
        RuleSpec {
            name: "direction".into(),
            domain: vec!["up".into(), "down".into()],
            applies_to: BTreeSet::from([FamilyKey { category: 2, family: 1 }]),
        },
    ];
    let binding = BTreeMap::from([
        ("side".to_owned(), CodeField::Fill),
        ("direction".to_owned(), CodeField::Rotation),
    ]);
    ClassificationSchema::new(prototypes, rules, binding).expect("DF-1 schema is valid")
}

/// Facet schema used by [`synthetic_catalog`].
pub fn synthetic_facet_schema() -> FacetSchema {
    let strs = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    FacetSchema {
        areas: areas(),
        boxes: BTreeMap::from([
            (
                "hand".to_owned(),
                vec![
                    FacetBox::new("fingers", strs(&["0", "1", "2", "3", "4", "5"])),
                    FacetBox::new("side", strs(&["palm", "back", "edge"])),
                    FacetBox::new("thumb", strs(&["in", "out"])),
                    FacetBox::new("hand", strs(&["left", "right"])),
                ],
            ),
            (
                "movement".to_owned(),
                vec![
                    FacetBox::new("direction", strs(&["up", "down", "left", "right", "forward", "back"])),
                    FacetBox::new("path", strs(&["straight", "curved", "circle", "zigzag"])),
                    FacetBox::new("plane", strs(&["wall", "floor"])),
                ],
            ),
            (
                "contact".to_owned(),
                vec![
                    FacetBox::new("kind", strs(&["touch", "grasp", "brush", "rub", "strike", "between"])),
                    FacetBox::new("repeat", strs(&["1", "2", "3"])),
                ],
            ),
            (
                "face".to_owned(),
                vec![
                    FacetBox::new("region", strs(&["eyes", "brows", "mouth", "cheeks", "nose"])),
                    FacetBox::new("tension", strs(&["neutral", "tense", "relaxed"])),
                ],
            ),
            (
                "shoulders".to_owned(),
                vec![
                    FacetBox::new("side", strs(&["left", "right", "both"])),
                    FacetBox::new("motion", strs(&["raise", "drop", "shrug", "tilt"])),
                ],
            ),
        ]),
    }
}

/// A reproducible random catalog of `size` glyphs. Each glyph sets each box
/// of its area with probability 0.85, so some glyphs are unreachable
/// through some boxes.
pub fn synthetic_catalog(size: usize, seed: u64) -> Catalog {
    let schema = synthetic_facet_schema();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(size);
    let mut glyphs = Vec::with_capacity(size);

    while glyphs.len() < size {
        let (category, _, area) = ROLES[rng.random_range(0..ROLES.len())];
        let code = code(
            category.into(),
            rng.random_range(1..=20),
            rng.random_range(1..=999),
            rng.random_range(1..=6),
            rng.random_range(1..=6),
            rng.random_range(1..=8),
        );
        if !seen.insert(code) {
            continue;
        }
        let mut attrs = Vec::new();
        for b in schema.boxes(area) {
            if rng.random_bool(0.85) {
                let option = b.options.choose(&mut rng).expect("boxes have options");
                attrs.push((b.name.as_str(), option.clone()));
            }
        }
        glyphs.push(glyph(code, &[area], &attrs));
    }

    Catalog::new(base_header(&format!("SYN-{size}-{seed}"), schema), glyphs).expect("synthetic catalog is valid")
}

/// Writes a solid square in the role's teaching colour for every glyph,
/// at the glyph's declared size, under `root`.
pub fn write_placeholder_images(catalog: &Catalog, root: &Path) -> io::Result<()> {
    for glyph in catalog.glyphs() {
        let role = catalog.role_of(&glyph.code).unwrap_or(GlyphRole::HandConfiguration);
        let [r, g, b] = role.teaching_color();
        let img = image::RgbaImage::from_fn(glyph.width_px, glyph.height_px, |x, y| {
            let edge = x == 0 || y == 0 || x + 1 == glyph.width_px || y + 1 == glyph.height_px;
            if edge {
                image::Rgba([0, 0, 0, 255])
            } else {
                image::Rgba([r, g, b, 255])
            }
        });
        let path = root.join(&glyph.image_ref);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        img.save(&path).map_err(io::Error::other)?;
    }
    Ok(())
}

/// Writes `manifest.jsonl` (and `schema.json` when given) into `dir`.
pub fn write_fixture(
    dir: &Path,
    catalog: &Catalog,
    schema: Option<&ClassificationSchema>,
    images: bool,
) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    catalog.write_manifest(BufWriter::new(File::create(dir.join("manifest.jsonl"))?))?;
    if let Some(schema) = schema {
        fs::write(dir.join("schema.json"), schema.to_json())?;
    }
    if images {
        write_placeholder_images(catalog, dir)?;
    }
    Ok(())
}
