use std::collections::HashMap;

use serde::Serialize;

use super::SftmConfig;
use crate::dom::{tokenize, DomTree, NodeId};
use crate::error::SftmError;

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TokenEntry {
    pub token: String,
    /// Nodes of the old tree whose label contains the token.
    pub left: Vec<NodeId>,
    /// Nodes of the new tree whose label contains the token.
    pub right: Vec<NodeId>,
    pub weight: f64,
    pub pruned: bool,
}

impl TokenEntry {
    /// Whether the token contributes to any pair.
    pub fn is_live(&self) -> bool {
        !self.pruned && !self.left.is_empty() && !self.right.is_empty()
    }
}

/// Inverted index from label tokens to the nodes carrying them.
#[derive(Debug, Clone)]
pub struct TokenIndex {
    entries: Vec<TokenEntry>,
    lookup: HashMap<String, usize>,
    threshold: f64,
}

impl TokenIndex {
    pub fn get(&self, token: &str) -> Option<&TokenEntry> {
        self.lookup.get(token).map(|i| &self.entries[*i])
    }

    /// Entries in order of first occurrence (old tree first).
    pub fn entries(&self) -> &[TokenEntry] {
        &self.entries
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Stage {
    Initial,
    Propagated,
}

/// Sparse scores over candidate pairs, sorted by `(left, right)`.
#[derive(Debug, Clone)]
pub struct SimilarityTable {
    stage: Stage,
    provenance: (String, String),
    sizes: (usize, usize),
    pairs: Vec<(NodeId, NodeId)>,
    scores: Vec<f64>,
}

impl SimilarityTable {
    pub(crate) fn new(
        stage: Stage,
        old: &DomTree,
        new: &DomTree,
        pairs: Vec<(NodeId, NodeId)>,
        scores: Vec<f64>,
    ) -> SimilarityTable {
        debug_assert!(pairs.windows(2).all(|w| w[0] < w[1]));
        SimilarityTable {
            stage,
            provenance: (old.digest().to_owned(), new.digest().to_owned()),
            sizes: (old.size(), new.size()),
            pairs,
            scores,
        }
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(NodeId, NodeId)] {
        &self.pairs
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + Clone + '_ {
        self.pairs.iter().zip(&self.scores).map(|(&(a, b), &s)| (a, b, s))
    }

    pub fn position(&self, left: NodeId, right: NodeId) -> Option<usize> {
        self.pairs.binary_search(&(left, right)).ok()
    }

    /// Score of a candidate pair; `None` when the pair is not a candidate.
    pub fn get(&self, left: NodeId, right: NodeId) -> Option<f64> {
        self.position(left, right).map(|i| self.scores[i])
    }

    /// Score of a pair, 0 for non-candidates.
    pub fn score(&self, left: NodeId, right: NodeId) -> f64 {
        self.get(left, right).unwrap_or(0.0)
    }

    pub(crate) fn check(&self, old: &DomTree, new: &DomTree) -> Result<(), SftmError> {
        if self.sizes != (old.size(), new.size())
            || self.provenance.0 != old.digest()
            || self.provenance.1 != new.digest()
        {
            return Err(SftmError::Provenance);
        }
        Ok(())
    }
}

/// Indexes the labels of both trees and scores every pair of nodes sharing a
/// live token: `s0(e, e') = sum of w(t)` over shared tokens `t`.
pub fn initial_similarity(
    old: &DomTree,
    new: &DomTree,
    config: &SftmConfig,
) -> Result<(TokenIndex, SimilarityTable), SftmError> {
    if old.size() == 0 || new.size() == 0 {
        return Err(SftmError::EmptyTree);
    }
    let mut entries: Vec<TokenEntry> = Vec::new();
    let mut lookup: HashMap<String, usize> = HashMap::new();
    let mut left_tokens: Vec<Vec<usize>> = Vec::with_capacity(old.size());
    for (tree, is_left) in [(old, true), (new, false)] {
        for node in tree.nodes() {
            let label = tokenize(node, &config.tokenizer);
            let mut ids = Vec::with_capacity(label.len());
            for token in label.tokens {
                let i = match lookup.get(&token) {
                    Some(i) => *i,
                    None => {
                        entries.push(TokenEntry {
                            token: token.clone(),
                            left: Vec::new(),
                            right: Vec::new(),
                            weight: 0.0,
                            pruned: false,
                        });
                        lookup.insert(token, entries.len() - 1);
                        entries.len() - 1
                    }
                };
                if is_left {
                    entries[i].left.push(node.id());
                    ids.push(i);
                } else {
                    entries[i].right.push(node.id());
                }
            }
            if is_left {
                left_tokens.push(ids);
            }
        }
    }

    let threshold = config
        .prune_threshold
        .unwrap_or_else(|| config.prune_floor.max(((old.size() * new.size()) as f64).sqrt()));
    for e in &mut entries {
        let product = (e.left.len() * e.right.len()) as f64;
        e.pruned = product > threshold || config.ignored_tokens.contains(&e.token);
        if product > 0.0 {
            e.weight = 1.0 / product.powf(config.weight_exponent);
        }
    }

    // Accumulating in ascending token order makes every pair's sum a
    // subsequence of the self-pair's sum, so s0(n, m) <= s0(n, n) holds in
    // floating point too.
    let mut acc = vec![0.0f64; new.size()];
    let mut touched: Vec<usize> = Vec::new();
    let mut pairs = Vec::new();
    let mut scores = Vec::new();
    for (e, ids) in left_tokens.iter_mut().enumerate() {
        ids.retain(|i| entries[*i].is_live());
        ids.sort_unstable();
        for &t in ids.iter() {
            let entry = &entries[t];
            for r in &entry.right {
                if acc[r.0] == 0.0 {
                    touched.push(r.0);
                }
                acc[r.0] += entry.weight;
            }
        }
        touched.sort_unstable();
        for &r in &touched {
            pairs.push((NodeId(e), NodeId(r)));
            scores.push(acc[r]);
            acc[r] = 0.0;
        }
        touched.clear();
    }

    let index = TokenIndex {
        entries,
        lookup,
        threshold,
    };
    let table = SimilarityTable::new(Stage::Initial, old, new, pairs, scores);
    Ok((index, table))
}
