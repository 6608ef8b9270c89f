//! Per-element baseline relocator: scans every same-tag element of the new
//! tree and keeps the one closest to the target by absolute XPath, attribute
//! and text similarity.

use serde::{Deserialize, Serialize};

use crate::dom::XPathLocator;
use crate::dom::{absolute_xpath, tokenize, DomNode, DomTree, NodeId, TokenizerConfig};
use crate::error::{DomError, RepairError};
use crate::repair::{targets, ElementOutcome, LocatorResult, RepairOutcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct WaterConfig {
    pub xpath_weight: f64,
    pub attribute_weight: f64,
    pub text_weight: f64,
    /// Best candidates scoring below this are discarded.
    pub threshold: f64,
    /// Only the first candidates in document order are scored.
    pub max_candidates: Option<usize>,
}

impl Default for WaterConfig {
    fn default() -> Self {
        WaterConfig {
            xpath_weight: 0.6,
            attribute_weight: 0.25,
            text_weight: 0.15,
            threshold: 0.4,
            max_candidates: None,
        }
    }
}

impl WaterConfig {
    pub fn validate(&self) -> Result<(), RepairError> {
        let w = [self.xpath_weight, self.attribute_weight, self.text_weight];
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(RepairError::Config("weights must be non-negative".into()));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(RepairError::Config(format!("weights must sum to 1, got {sum}")));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(RepairError::Config(format!(
                "threshold must be in [0, 1], got {}",
                self.threshold
            )));
        }
        if self.max_candidates == Some(0) {
            return Err(RepairError::Config("maxCandidates must be positive".into()));
        }
        Ok(())
    }
}

/// Edit distance over characters.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if ca == cb { diag } else { 1 + diag.min(up).min(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

/// `1 - levenshtein / longer length`; two empty strings are identical.
pub fn string_similarity(a: &str, b: &str) -> f64 {
    let len = a.chars().count().max(b.chars().count());
    if len == 0 {
        return 1.0;
    }
    1.0 - levenshtein(a, b) as f64 / len as f64
}

fn attribute_tokens(node: &DomNode) -> Vec<String> {
    let mut tokens = tokenize(node, &TokenizerConfig::default()).tokens;
    tokens.remove(0); // the tag
    tokens
}

fn jaccard(a: &[String], b: &[String]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.iter().filter(|t| b.contains(t)).count();
    inter as f64 / (a.len() + b.len() - inter) as f64
}

/// Best same-tag counterpart of `e` in `new`, with its score, if it reaches
/// the threshold. Ties go to the earliest candidate in document order.
pub fn water_relocate(
    old: &DomTree,
    new: &DomTree,
    e: NodeId,
    config: &WaterConfig,
) -> Result<Option<(NodeId, f64)>, DomError> {
    let target = old.checked(e)?;
    let xpath = absolute_xpath(old, e)?;
    let attrs = attribute_tokens(target);
    let limit = config.max_candidates.unwrap_or(usize::MAX);
    let mut best: Option<(NodeId, f64)> = None;
    for cand in new.nodes().iter().filter(|n| n.tag() == target.tag()).take(limit) {
        let cand_xpath = absolute_xpath(new, cand.id())?;
        let score = config.xpath_weight * string_similarity(xpath.as_str(), cand_xpath.as_str())
            + config.attribute_weight * jaccard(&attrs, &attribute_tokens(cand))
            + config.text_weight * string_similarity(target.own_text(), cand.own_text());
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((cand.id(), score));
        }
    }
    Ok(best.filter(|(_, s)| *s >= config.threshold))
}

/// Repairs each locator element by element.
pub fn water_repair(
    old: &DomTree,
    new: &DomTree,
    locators: &[XPathLocator],
    config: &WaterConfig,
) -> Result<Vec<LocatorResult>, RepairError> {
    config.validate()?;
    Ok(locators
        .iter()
        .map(|loc| {
            let elements = targets(old, loc)?
                .into_iter()
                .map(|e| {
                    let found = water_relocate(old, new, e, config)?;
                    ElementOutcome::new(old, new, e, found)
                })
                .collect::<Result<_, _>>()?;
            Ok(RepairOutcome {
                locator: loc.clone(),
                elements,
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Textbook full-matrix edit distance.
    fn reference(a: &str, b: &str) -> usize {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for (i, row) in d.iter_mut().enumerate() {
            row[0] = i;
        }
        for (j, cell) in d[0].iter_mut().enumerate() {
            *cell = j;
        }
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
                d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
            }
        }
        d[a.len()][b.len()]
    }

    #[test]
    fn levenshtein_matches_reference() {
        let cases = [
            ("/html[1]/body[1]/div[1]/a[1]", "/html[1]/body[1]/div[2]/a[1]"),
            ("", "abc"),
            ("kitten", "sitting"),
            ("/a[1]", "/a[1]/b[2]"),
            ("héllo", "hello"),
        ];
        for (a, b) in cases {
            assert_eq!(levenshtein(a, b), reference(a, b), "{a} / {b}");
            assert_eq!(levenshtein(b, a), reference(a, b));
        }
        assert_eq!(
            levenshtein("/html[1]/body[1]/div[1]/a[1]", "/html[1]/body[1]/div[2]/a[1]"),
            1
        );
    }

    #[test]
    fn config_validation() {
        assert!(WaterConfig::default().validate().is_ok());
        let bad = WaterConfig {
            xpath_weight: 0.7,
            ..WaterConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
