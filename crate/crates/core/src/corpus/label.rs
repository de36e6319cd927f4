use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The six archaeological entity categories.
///
/// Variants are declared in alphabetical order of their short codes so the
/// derived `Ord` matches string order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityType {
    #[serde(rename = "ART")]
    Artefact,
    #[serde(rename = "CON")]
    Context,
    #[serde(rename = "LOC")]
    Location,
    #[serde(rename = "MAT")]
    Material,
    #[serde(rename = "PER")]
    Period,
    #[serde(rename = "SPE")]
    Species,
}

impl EntityType {
    pub const ALL: [EntityType; 6] = [
        EntityType::Artefact,
        EntityType::Context,
        EntityType::Location,
        EntityType::Material,
        EntityType::Period,
        EntityType::Species,
    ];

    pub fn code(self) -> &'static str {
        match self {
            EntityType::Artefact => "ART",
            EntityType::Context => "CON",
            EntityType::Location => "LOC",
            EntityType::Material => "MAT",
            EntityType::Period => "PER",
            EntityType::Species => "SPE",
        }
    }

    /// Human readable category name.
    pub fn display_name(self) -> &'static str {
        match self {
            EntityType::Artefact => "Artefacts",
            EntityType::Context => "Contexts",
            EntityType::Location => "Locations",
            EntityType::Material => "Materials",
            EntityType::Period => "Time Periods",
            EntityType::Species => "Species",
        }
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for EntityType {
    type Err = LabelParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "ART" => EntityType::Artefact,
            "CON" => EntityType::Context,
            "LOC" => EntityType::Location,
            "MAT" => EntityType::Material,
            "PER" => EntityType::Period,
            "SPE" => EntityType::Species,
            other => return Err(LabelParseError(format!("unknown entity type `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct LabelParseError(pub String);

/// The position tag of a BIO label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    B,
    I,
    O,
}

/// A BIO label: `B-X`, `I-X` or `O`.
///
/// `Ord` follows the rendered string (`B-ART` < `B-CON` < ... < `I-SPE` < `O`),
/// which is also the canonical label order used by confusion matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BioLabel {
    B(EntityType),
    I(EntityType),
    O,
}

impl BioLabel {
    /// All 13 labels in canonical order.
    pub const ALL: [BioLabel; 13] = [
        BioLabel::B(EntityType::Artefact),
        BioLabel::B(EntityType::Context),
        BioLabel::B(EntityType::Location),
        BioLabel::B(EntityType::Material),
        BioLabel::B(EntityType::Period),
        BioLabel::B(EntityType::Species),
        BioLabel::I(EntityType::Artefact),
        BioLabel::I(EntityType::Context),
        BioLabel::I(EntityType::Location),
        BioLabel::I(EntityType::Material),
        BioLabel::I(EntityType::Period),
        BioLabel::I(EntityType::Species),
        BioLabel::O,
    ];

    pub fn tag(self) -> Tag {
        match self {
            BioLabel::B(_) => Tag::B,
            BioLabel::I(_) => Tag::I,
            BioLabel::O => Tag::O,
        }
    }

    pub fn etype(self) -> Option<EntityType> {
        match self {
            BioLabel::B(t) | BioLabel::I(t) => Some(t),
            BioLabel::O => None,
        }
    }

    pub fn is_outside(self) -> bool {
        self == BioLabel::O
    }

    /// Position of this label in [`BioLabel::ALL`].
    pub fn index(self) -> usize {
        let type_idx = |t: EntityType| EntityType::ALL.iter().position(|&x| x == t).unwrap();
        match self {
            BioLabel::B(t) => type_idx(t),
            BioLabel::I(t) => 6 + type_idx(t),
            BioLabel::O => 12,
        }
    }
}

impl fmt::Display for BioLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BioLabel::B(t) => write!(f, "B-{t}"),
            BioLabel::I(t) => write!(f, "I-{t}"),
            BioLabel::O => f.write_str("O"),
        }
    }
}

impl FromStr for BioLabel {
    type Err = LabelParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "O" {
            return Ok(BioLabel::O);
        }
        let bad = || LabelParseError(format!("invalid label `{s}` (expected O, B-X or I-X)"));
        let (tag, etype) = s.split_once('-').ok_or_else(bad)?;
        let etype: EntityType = etype
            .parse()
            .map_err(|e: LabelParseError| LabelParseError(format!("invalid label `{s}`: {}", e.0)))?;
        match tag {
            "B" => Ok(BioLabel::B(etype)),
            "I" => Ok(BioLabel::I(etype)),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for BioLabel {
    type Error = LabelParseError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<BioLabel> for String {
    fn from(value: BioLabel) -> Self {
        value.to_string()
    }
}

/// Index of the first label that breaks BIO validity, if any.
///
/// A sequence is valid when no `I-X` starts it and no `I-X` follows a label
/// of a different type (or `O`).
pub fn first_bio_violation(labels: &[BioLabel]) -> Option<usize> {
    let mut prev: Option<EntityType> = None;
    for (i, label) in labels.iter().enumerate() {
        if let BioLabel::I(t) = label {
            if prev != Some(*t) {
                return Some(i);
            }
        }
        prev = label.etype();
    }
    None
}

pub fn is_valid_bio(labels: &[BioLabel]) -> bool {
    first_bio_violation(labels).is_none()
}
