use erratum_core::dom::{DomNode, DomTree, NodeId};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Locators sampled per page.
pub const DEFAULT_TARGETS: usize = 15;

/// Which elements count as clickable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct ClickableConfig {
    /// Elements clickable by tag alone.
    pub tags: Vec<String>,
    /// `input` elements with one of these `type` values.
    pub input_types: Vec<String>,
    /// Any element carrying one of these attributes.
    pub handler_attrs: Vec<String>,
}

impl Default for ClickableConfig {
    fn default() -> Self {
        ClickableConfig {
            tags: vec!["a".into(), "button".into()],
            input_types: vec!["submit".into(), "button".into()],
            handler_attrs: vec!["onclick".into()],
        }
    }
}

pub fn is_clickable(node: &DomNode, config: &ClickableConfig) -> bool {
    config.tags.iter().any(|t| t.eq_ignore_ascii_case(node.tag()))
        || (node.tag() == "input"
            && node
                .attr("type")
                .is_some_and(|t| config.input_types.iter().any(|x| x.eq_ignore_ascii_case(t.trim()))))
        || config.handler_attrs.iter().any(|a| node.attr(a).is_some())
}

/// Clickable elements in document order.
pub fn clickable(tree: &DomTree, config: &ClickableConfig) -> Vec<NodeId> {
    tree.nodes()
        .iter()
        .filter(|n| is_clickable(n, config))
        .map(DomNode::id)
        .collect()
}

/// Uniform sample of `min(k, #clickable)` distinct clickable elements,
/// returned in document order.
pub fn select_targets(tree: &DomTree, k: usize, seed: u64, config: &ClickableConfig) -> Vec<NodeId> {
    let all = clickable(tree, config);
    if all.len() <= k {
        return all;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = sample(&mut rng, all.len(), k).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| all[i]).collect()
}
