use std::fmt;
use std::str::FromStr;

use erratum_core::dom::NodeId;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutcomeLabel {
    Correct,
    Mismatch,
    NoMatch,
}

impl OutcomeLabel {
    pub const ALL: [OutcomeLabel; 3] = [OutcomeLabel::Correct, OutcomeLabel::Mismatch, OutcomeLabel::NoMatch];

    pub fn name(self) -> &'static str {
        match self {
            OutcomeLabel::Correct => "correct",
            OutcomeLabel::Mismatch => "mismatch",
            OutcomeLabel::NoMatch => "no-match",
        }
    }
}

impl fmt::Display for OutcomeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Label of a relocation. `truth` is `None` when the target was deleted, in
/// which case finding nothing is correct.
pub fn classify(predicted: Option<NodeId>, truth: Option<NodeId>) -> OutcomeLabel {
    match (predicted, truth) {
        (None, None) => OutcomeLabel::Correct,
        (None, Some(_)) => OutcomeLabel::NoMatch,
        (Some(p), Some(t)) if p == t => OutcomeLabel::Correct,
        (Some(_), _) => OutcomeLabel::Mismatch,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Erratum,
    Water,
}

impl Algorithm {
    pub const ALL: [Algorithm; 2] = [Algorithm::Erratum, Algorithm::Water];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Erratum => "erratum",
            Algorithm::Water => "water",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "erratum" => Ok(Algorithm::Erratum),
            "water" => Ok(Algorithm::Water),
            other => Err(format!("unknown algorithm {other:?}, expected erratum or water")),
        }
    }
}
