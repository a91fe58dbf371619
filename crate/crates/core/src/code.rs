//! Structured glyph identifiers.
//!
//! A glyph code is six decimal fields, written zero-padded and hyphen
//! separated as `CC-FF-BBB-VV-LL-RR` (category, family, base, variation,
//! fill, rotation). Every field is 1-based; zero never appears in a valid
//! code.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// One of the six numeric components of a [`GlyphCode`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeField {
    Category,
    Family,
    Base,
    Variation,
    Fill,
    Rotation,
}

impl CodeField {
    pub const ALL: [CodeField; 6] = [
        CodeField::Category,
        CodeField::Family,
        CodeField::Base,
        CodeField::Variation,
        CodeField::Fill,
        CodeField::Rotation,
    ];

    /// Number of decimal digits in the canonical text form.
    pub const fn width(self) -> usize {
        match self {
            CodeField::Base => 3,
            _ => 2,
        }
    }

    pub const fn max_value(self) -> u16 {
        match self {
            CodeField::Base => 999,
            _ => 99,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            CodeField::Category => "category",
            CodeField::Family => "family",
            CodeField::Base => "base",
            CodeField::Variation => "variation",
            CodeField::Fill => "fill",
            CodeField::Rotation => "rotation",
        }
    }
}

impl fmt::Display for CodeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("malformed glyph code {text:?}: {reason}")]
    MalformedCode { text: String, reason: &'static str },
    #[error("glyph code {text:?} has a zero {field} field")]
    ZeroField { text: String, field: CodeField },
    #[error("{field} value {value} outside 1..={}", field.max_value())]
    OutOfRange { field: CodeField, value: u32 },
}

/// A glyph identifier. Ordering is field-wise, which coincides with the
/// lexicographic order of the canonical text form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GlyphCode {
    category: u8,
    family: u8,
    base: u16,
    variation: u8,
    fill: u8,
    rotation: u8,
}

impl GlyphCode {
    pub fn new(
        category: u32,
        family: u32,
        base: u32,
        variation: u32,
        fill: u32,
        rotation: u32,
    ) -> Result<Self, CodeError> {
        let check = |field: CodeField, value: u32| {
            if value == 0 || value > u32::from(field.max_value()) {
                Err(CodeError::OutOfRange { field, value })
            } else {
                Ok(value)
            }
        };
        Ok(GlyphCode {
            category: check(CodeField::Category, category)? as u8,
            family: check(CodeField::Family, family)? as u8,
            base: check(CodeField::Base, base)? as u16,
            variation: check(CodeField::Variation, variation)? as u8,
            fill: check(CodeField::Fill, fill)? as u8,
            rotation: check(CodeField::Rotation, rotation)? as u8,
        })
    }

    pub fn category(&self) -> u8 {
        self.category
    }

    pub fn family(&self) -> u8 {
        self.family
    }

    pub fn base(&self) -> u16 {
        self.base
    }

    pub fn variation(&self) -> u8 {
        self.variation
    }

    pub fn fill(&self) -> u8 {
        self.fill
    }

    pub fn rotation(&self) -> u8 {
        self.rotation
    }

    pub fn field(&self, field: CodeField) -> u16 {
        match field {
            CodeField::Category => self.category.into(),
            CodeField::Family => self.family.into(),
            CodeField::Base => self.base,
            CodeField::Variation => self.variation.into(),
            CodeField::Fill => self.fill.into(),
            CodeField::Rotation => self.rotation.into(),
        }
    }

    /// Returns a copy with one field replaced.
    pub fn with_field(&self, field: CodeField, value: u32) -> Result<Self, CodeError> {
        let f = |target| {
            if target == field {
                value
            } else {
                u32::from(self.field(target))
            }
        };
        GlyphCode::new(
            f(CodeField::Category),
            f(CodeField::Family),
            f(CodeField::Base),
            f(CodeField::Variation),
            f(CodeField::Fill),
            f(CodeField::Rotation),
        )
    }
}

pub fn parse_glyph_code(text: &str) -> Result<GlyphCode, CodeError> {
    let malformed = |reason| CodeError::MalformedCode {
        text: text.to_owned(),
        reason,
    };

    let parts: Vec<&str> = text.split('-').collect();
    if parts.len() != CodeField::ALL.len() {
        return Err(malformed("expected six hyphen-separated fields"));
    }

    let mut values = [0u32; 6];
    for ((part, field), slot) in parts.iter().zip(CodeField::ALL).zip(values.iter_mut()) {
        if !part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(malformed("non-digit character"));
        }
        if part.len() != field.width() {
            return Err(malformed("wrong field width"));
        }
        // width is at most 3 digits so this cannot overflow
        *slot = part.bytes().fold(0, |acc, b| acc * 10 + u32::from(b - b'0'));
    }

    if let Some(field) = CodeField::ALL
        .iter()
        .zip(values)
        .find_map(|(field, v)| (v == 0).then_some(*field))
    {
        return Err(CodeError::ZeroField {
            text: text.to_owned(),
            field,
        });
    }

    let [c, f, b, v, l, r] = values;
    GlyphCode::new(c, f, b, v, l, r)
}

pub fn format_glyph_code(code: &GlyphCode) -> String {
    code.to_string()
}

impl fmt::Display for GlyphCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:02}-{:02}-{:03}-{:02}-{:02}-{:02}",
            self.category, self.family, self.base, self.variation, self.fill, self.rotation
        )
    }
}

impl FromStr for GlyphCode {
    type Err = CodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_glyph_code(s)
    }
}

impl Serialize for GlyphCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GlyphCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = <std::borrow::Cow<'de, str>>::deserialize(deserializer)?;
        parse_glyph_code(&text).map_err(serde::de::Error::custom)
    }
}
