use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::MutagenError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Structure,
    Attribute,
    Content,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Structure, Category::Attribute, Category::Content];

    pub fn name(self) -> &'static str {
        match self {
            Category::Structure => "structure",
            Category::Attribute => "attribute",
            Category::Content => "content",
        }
    }

    pub fn kinds(self) -> Vec<MutationKind> {
        MutationKind::ALL.into_iter().filter(|k| k.category() == self).collect()
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The mutation operators, grouped by category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MutationKind {
    StructureRemove,
    StructureDuplicate,
    StructureWrap,
    StructureUnwrap,
    StructureSwap,
    AttributeRemove,
    AttributeRemoveWords,
    ContentReplaceRandom,
    ContentChangeLetters,
    ContentRemove,
    ContentRemoveWords,
}

impl MutationKind {
    pub const ALL: [MutationKind; 11] = [
        MutationKind::StructureRemove,
        MutationKind::StructureDuplicate,
        MutationKind::StructureWrap,
        MutationKind::StructureUnwrap,
        MutationKind::StructureSwap,
        MutationKind::AttributeRemove,
        MutationKind::AttributeRemoveWords,
        MutationKind::ContentReplaceRandom,
        MutationKind::ContentChangeLetters,
        MutationKind::ContentRemove,
        MutationKind::ContentRemoveWords,
    ];

    pub fn category(self) -> Category {
        use MutationKind::*;
        match self {
            StructureRemove | StructureDuplicate | StructureWrap | StructureUnwrap | StructureSwap => {
                Category::Structure
            }
            AttributeRemove | AttributeRemoveWords => Category::Attribute,
            _ => Category::Content,
        }
    }

    pub fn name(self) -> &'static str {
        use MutationKind::*;
        match self {
            StructureRemove => "structure:remove",
            StructureDuplicate => "structure:duplicate",
            StructureWrap => "structure:wrap",
            StructureUnwrap => "structure:unwrap",
            StructureSwap => "structure:swap",
            AttributeRemove => "attribute:remove",
            AttributeRemoveWords => "attribute:remove-words",
            ContentReplaceRandom => "content:replace-random",
            ContentChangeLetters => "content:change-letters",
            ContentRemove => "content:remove",
            ContentRemoveWords => "content:remove-words",
        }
    }
}

impl fmt::Display for MutationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MutationKind {
    type Err = MutagenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MutationKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| MutagenError::UnknownKind(s.to_owned()))
    }
}

impl Serialize for MutationKind {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for MutationKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses a comma-separated list of kinds and categories, e.g.
/// `structure,attribute:remove`. `all` selects every kind.
pub fn parse_kinds(spec: &str) -> Result<Vec<MutationKind>, MutagenError> {
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let add: Vec<MutationKind> = match part {
            "all" => MutationKind::ALL.to_vec(),
            "structure" => Category::Structure.kinds(),
            "attribute" => Category::Attribute.kinds(),
            "content" => Category::Content.kinds(),
            k => vec![k.parse()?],
        };
        for k in add {
            if !out.contains(&k) {
                out.push(k);
            }
        }
    }
    if out.is_empty() {
        return Err(MutagenError::NoKinds);
    }
    Ok(out)
}
