//! Prototype-and-rule classification of the glyph inventory.
//!
//! Glyphs are grouped into categories, families and sub-families. Each
//! family holds prototype glyphs, and every concrete glyph is a prototype
//! declined by the rules that apply to its family. A rule has a finite,
//! ordered option domain; option `i` (0-based) writes the value `i + 1`
//! into the code field the rule is bound to. Fields with no applicable rule
//! stay at 1, so the prototype's own code is its identity declension.
//!
//! There is no per-glyph exception table: [`ClassificationSchema::decline`]
//! and [`ClassificationSchema::decompose`] are computed from the schema
//! alone and are exact inverses.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::Catalog;
use crate::code::{CodeField, GlyphCode};

/// Code fields a rule may drive. Category, family and base identify the
/// prototype.
pub const RULE_FIELDS: [CodeField; 3] = [CodeField::Variation, CodeField::Fill, CodeField::Rotation];

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("invalid classification schema: {0}")]
    InvalidSchema(String),
    #[error("prototype {0:?} is not part of the schema")]
    UnknownPrototype(String),
    #[error("assignment is missing applicable rule {rule:?} for prototype {prototype:?}")]
    IncompleteAssignment { prototype: String, rule: String },
    #[error("rule {rule:?} does not apply to prototype {prototype:?}")]
    InapplicableRule { prototype: String, rule: String },
    #[error("option {option:?} is not in the domain of rule {rule:?}")]
    OptionOutOfDomain { rule: String, option: String },
    #[error("glyph {code} is unclassified: {reason}")]
    Unclassified { code: GlyphCode, reason: String },
    #[error("invalid schema file: {0}")]
    Format(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyKey {
    pub category: u8,
    pub family: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSpec {
    pub name: String,
    pub domain: Vec<String>,
    pub applies_to: BTreeSet<FamilyKey>,
}

impl RuleSpec {
    /// 1-based value of an option.
    pub fn value_of(&self, option: &str) -> Option<u16> {
        self.domain.iter().position(|o| o == option).map(|i| i as u16 + 1)
    }

    pub fn option_for(&self, value: u16) -> Option<&str> {
        usize::from(value)
            .checked_sub(1)
            .and_then(|i| self.domain.get(i))
            .map(String::as_str)
    }

    pub fn identity(&self) -> &str {
        &self.domain[0]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prototype {
    pub id: String,
    pub category: u8,
    pub family: u8,
    pub sub_family: u8,
    pub base: u16,
}

impl Prototype {
    pub fn family_key(&self) -> FamilyKey {
        FamilyKey {
            category: self.category,
            family: self.family,
        }
    }
}

/// Rule name to chosen option.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RuleAssignment {
    pub values: BTreeMap<String, String>,
}

impl RuleAssignment {
    pub fn new<K: Into<String>, V: Into<String>>(pairs: impl IntoIterator<Item = (K, V)>) -> Self {
        RuleAssignment {
            values: pairs.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaFile {
    prototypes: Vec<Prototype>,
    rules: Vec<RuleSpec>,
    field_binding: BTreeMap<String, CodeField>,
}

#[derive(Debug, Clone)]
pub struct ClassificationSchema {
    prototypes: Vec<Prototype>,
    rules: Vec<RuleSpec>,
    field_binding: BTreeMap<String, CodeField>,
    by_identity: HashMap<(u8, u8, u16), usize>,
    by_id: HashMap<String, usize>,
    rule_index: HashMap<String, usize>,
}

impl PartialEq for ClassificationSchema {
    fn eq(&self, other: &Self) -> bool {
        self.prototypes == other.prototypes && self.rules == other.rules && self.field_binding == other.field_binding
    }
}

impl ClassificationSchema {
    pub fn new(
        prototypes: Vec<Prototype>,
        rules: Vec<RuleSpec>,
        field_binding: BTreeMap<String, CodeField>,
    ) -> Result<ClassificationSchema, ClassifyError> {
        let invalid = |msg: String| Err(ClassifyError::InvalidSchema(msg));

        let mut rule_index = HashMap::new();
        for (i, rule) in rules.iter().enumerate() {
            if rule_index.insert(rule.name.clone(), i).is_some() {
                return invalid(format!("rule {:?} declared twice", rule.name));
            }
            if rule.domain.is_empty() {
                return invalid(format!("rule {:?} has an empty domain", rule.name));
            }
            let mut seen = BTreeSet::new();
            if let Some(dup) = rule.domain.iter().find(|o| !seen.insert(o.as_str())) {
                return invalid(format!("rule {:?} lists option {dup:?} twice", rule.name));
            }
            let Some(field) = field_binding.get(&rule.name) else {
                return invalid(format!("rule {:?} is not bound to a code field", rule.name));
            };
            if rule.domain.len() > usize::from(field.max_value()) {
                return invalid(format!(
                    "rule {:?} has more options than field {field} can encode",
                    rule.name
                ));
            }
        }

        let mut bound = BTreeMap::new();
        for (rule, field) in &field_binding {
            if !rule_index.contains_key(rule) {
                return invalid(format!("field_binding names unknown rule {rule:?}"));
            }
            if !RULE_FIELDS.contains(field) {
                return invalid(format!(
                    "rule {rule:?} is bound to {field}, which identifies the prototype"
                ));
            }
            if let Some(other) = bound.insert(*field, rule) {
                return invalid(format!("field {field} is bound to both {other:?} and {rule:?}"));
            }
        }

        let mut by_identity = HashMap::new();
        let mut by_id = HashMap::new();
        for (i, p) in prototypes.iter().enumerate() {
            if GlyphCode::new(p.category.into(), p.family.into(), p.base.into(), 1, 1, 1).is_err() || p.sub_family == 0
            {
                return invalid(format!("prototype {:?} has a field out of range", p.id));
            }
            if by_identity.insert((p.category, p.family, p.base), i).is_some() {
                return invalid(format!(
                    "prototype {:?} repeats category {} family {} base {}",
                    p.id, p.category, p.family, p.base
                ));
            }
            if by_id.insert(p.id.clone(), i).is_some() {
                return invalid(format!("prototype id {:?} used twice", p.id));
            }
        }

        Ok(ClassificationSchema {
            prototypes,
            rules,
            field_binding,
            by_identity,
            by_id,
            rule_index,
        })
    }

    pub fn from_json(text: &str) -> Result<ClassificationSchema, ClassifyError> {
        let file: SchemaFile = serde_json::from_str(text)?;
        ClassificationSchema::new(file.prototypes, file.rules, file.field_binding)
    }

    pub fn load(path: &Path) -> Result<ClassificationSchema, ClassifyError> {
        ClassificationSchema::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let file = SchemaFile {
            prototypes: self.prototypes.clone(),
            rules: self.rules.clone(),
            field_binding: self.field_binding.clone(),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("schema serializes");
        text.push('\n');
        text
    }

    pub fn prototypes(&self) -> &[Prototype] {
        &self.prototypes
    }

    pub fn rules(&self) -> &[RuleSpec] {
        &self.rules
    }

    pub fn rule(&self, name: &str) -> Option<&RuleSpec> {
        self.rule_index.get(name).map(|i| &self.rules[*i])
    }

    pub fn prototype(&self, id: &str) -> Option<&Prototype> {
        self.by_id.get(id).map(|i| &self.prototypes[*i])
    }

    pub fn binding(&self, rule: &str) -> Option<CodeField> {
        self.field_binding.get(rule).copied()
    }

    /// Rules applicable to a prototype's family, in declaration order.
    pub fn applicable_rules<'a>(&'a self, proto: &Prototype) -> impl Iterator<Item = &'a RuleSpec> + 'a {
        let key = proto.family_key();
        self.rules.iter().filter(move |r| r.applies_to.contains(&key))
    }

    pub fn identity_assignment(&self, proto: &Prototype) -> RuleAssignment {
        RuleAssignment::new(
            self.applicable_rules(proto)
                .map(|r| (r.name.clone(), r.identity().to_owned())),
        )
    }

    fn known_prototype(&self, proto: &Prototype) -> Result<(), ClassifyError> {
        match self.by_id.get(&proto.id) {
            Some(i) if self.prototypes[*i] == *proto => Ok(()),
            _ => Err(ClassifyError::UnknownPrototype(proto.id.clone())),
        }
    }

    /// Produces the code of `proto` declined by `assignment`.
    pub fn decline(&self, proto: &Prototype, assignment: &RuleAssignment) -> Result<GlyphCode, ClassifyError> {
        self.known_prototype(proto)?;
        let key = proto.family_key();

        for name in assignment.values.keys() {
            let applicable = self.rule(name).is_some_and(|r| r.applies_to.contains(&key));
            if !applicable {
                return Err(ClassifyError::InapplicableRule {
                    prototype: proto.id.clone(),
                    rule: name.clone(),
                });
            }
        }

        let mut values = [1u16; 3];
        for rule in self.applicable_rules(proto) {
            let Some(option) = assignment.values.get(&rule.name) else {
                return Err(ClassifyError::IncompleteAssignment {
                    prototype: proto.id.clone(),
                    rule: rule.name.clone(),
                });
            };
            let value = rule.value_of(option).ok_or_else(|| ClassifyError::OptionOutOfDomain {
                rule: rule.name.clone(),
                option: option.clone(),
            })?;
            let field = self.field_binding[&rule.name];
            values[rule_slot(field)] = value;
        }

        let [v, l, r] = values.map(u32::from);
        Ok(
            GlyphCode::new(proto.category.into(), proto.family.into(), proto.base.into(), v, l, r)
                .expect("prototype and rule values are range-checked at schema construction"),
        )
    }

    /// Finds the unique prototype and assignment that decline to `code`.
    pub fn decompose(&self, code: &GlyphCode) -> Result<(&Prototype, RuleAssignment), ClassifyError> {
        let unclassified = |reason: String| ClassifyError::Unclassified { code: *code, reason };

        let proto = self
            .by_identity
            .get(&(code.category(), code.family(), code.base()))
            .map(|i| &self.prototypes[*i])
            .ok_or_else(|| unclassified("no prototype has this category, family and base".into()))?;

        let mut assignment = RuleAssignment::default();
        let mut driven = [false; 3];
        for rule in self.applicable_rules(proto) {
            let field = self.field_binding[&rule.name];
            driven[rule_slot(field)] = true;
            let value = code.field(field);
            let option = rule.option_for(value).ok_or_else(|| {
                unclassified(format!(
                    "{field} value {value} is outside the domain of rule {:?}",
                    rule.name
                ))
            })?;
            assignment.values.insert(rule.name.clone(), option.to_owned());
        }
        for (field, is_driven) in RULE_FIELDS.iter().zip(driven) {
            if !is_driven && code.field(*field) != 1 {
                return Err(unclassified(format!("{field} varies but no applicable rule drives it")));
            }
        }
        Ok((proto, assignment))
    }

    /// Every (prototype, assignment) pair the schema can produce, prototypes
    /// in declaration order and assignments in odometer order.
    pub fn enumerate(&self) -> Vec<(&Prototype, RuleAssignment)> {
        let mut out = Vec::new();
        for proto in &self.prototypes {
            let rules: Vec<&RuleSpec> = self.applicable_rules(proto).collect();
            let mut odometer = vec![0usize; rules.len()];
            loop {
                out.push((
                    proto,
                    RuleAssignment::new(
                        rules
                            .iter()
                            .zip(&odometer)
                            .map(|(r, i)| (r.name.clone(), r.domain[*i].clone())),
                    ),
                ));
                let mut pos = rules.len();
                let wrapped = loop {
                    if pos == 0 {
                        break true;
                    }
                    pos -= 1;
                    odometer[pos] += 1;
                    if odometer[pos] < rules[pos].domain.len() {
                        break false;
                    }
                    odometer[pos] = 0;
                };
                if wrapped {
                    break;
                }
            }
        }
        out
    }

    /// Codes reachable by declining any prototype, ascending.
    pub fn reachable_codes(&self) -> BTreeSet<GlyphCode> {
        self.enumerate()
            .into_iter()
            .map(|(p, a)| self.decline(p, &a).expect("enumerated assignments are complete"))
            .collect()
    }
}

fn rule_slot(field: CodeField) -> usize {
    match field {
        CodeField::Variation => 0,
        CodeField::Fill => 1,
        CodeField::Rotation => 2,
        other => unreachable!("{other} cannot be rule-bound"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnclassifiedGlyph {
    pub code: GlyphCode,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupTally {
    pub category: u8,
    pub family: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sub_family: Option<u8>,
    pub glyphs: usize,
}

/// Result of checking a catalog against a schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub total: usize,
    pub classified: usize,
    pub unclassified: Vec<UnclassifiedGlyph>,
    pub families: Vec<GroupTally>,
    pub sub_families: Vec<GroupTally>,
    /// Codes the schema can produce that the catalog lacks.
    pub unreachable: Vec<GlyphCode>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.unclassified.is_empty() && self.unreachable.is_empty()
    }
}

pub fn audit_schema(schema: &ClassificationSchema, catalog: &Catalog) -> AuditReport {
    let mut unclassified = Vec::new();
    let mut families: BTreeMap<(u8, u8), usize> = BTreeMap::new();
    let mut sub_families: BTreeMap<(u8, u8, u8), usize> = BTreeMap::new();
    let mut classified = 0;

    for glyph in catalog.glyphs() {
        match schema.decompose(&glyph.code) {
            Ok((proto, _)) => {
                classified += 1;
                *families.entry((proto.category, proto.family)).or_default() += 1;
                *sub_families
                    .entry((proto.category, proto.family, proto.sub_family))
                    .or_default() += 1;
            }
            Err(ClassifyError::Unclassified { code, reason }) => unclassified.push(UnclassifiedGlyph { code, reason }),
            Err(other) => unreachable!("decompose only reports Unclassified, got {other}"),
        }
    }

    let unreachable = schema
        .reachable_codes()
        .into_iter()
        .filter(|c| !catalog.contains(c))
        .collect();

    AuditReport {
        total: catalog.len(),
        classified,
        unclassified,
        families: families
            .into_iter()
            .map(|((category, family), glyphs)| GroupTally {
                category,
                family,
                sub_family: None,
                glyphs,
            })
            .collect(),
        sub_families: sub_families
            .into_iter()
            .map(|((category, family, sub), glyphs)| GroupTally {
                category,
                family,
                sub_family: Some(sub),
                glyphs,
            })
            .collect(),
        unreachable,
    }
}
