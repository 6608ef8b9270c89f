use serde::{Deserialize, Serialize};

use super::{DomNode, DEFAULT_SIGNATURE_ATTR};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase")]
pub struct TokenizerConfig {
    /// Add the words of the node's own text to its label.
    pub include_text: bool,
    /// Attributes whose values are also split on whitespace.
    pub multi_valued: Vec<String>,
    /// Never tokenized, even if a tree kept it as a regular attribute.
    pub signature_attr: String,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            include_text: false,
            multi_valued: vec!["class".to_owned()],
            signature_attr: DEFAULT_SIGNATURE_ATTR.to_owned(),
        }
    }
}

/// Token set of a node, in first-seen order without duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Label {
    pub tokens: Vec<String>,
}

impl Label {
    fn push(&mut self, token: &str) {
        if !token.is_empty() && !self.tokens.iter().any(|t| t == token) {
            self.tokens.push(token.to_owned());
        }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.tokens.iter().any(|t| t == token)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Label of a node: its tag, every attribute name and trimmed value, the
/// whitespace-separated parts of multi-valued attributes, and optionally the
/// words of its own text.
pub fn tokenize(node: &DomNode, config: &TokenizerConfig) -> Label {
    let mut label = Label::default();
    label.push(node.tag());
    for (name, value) in node.attrs() {
        if *name == config.signature_attr {
            continue;
        }
        label.push(name);
        let value = value.trim();
        label.push(value);
        if config.multi_valued.iter().any(|m| m == name) {
            for part in value.split_whitespace() {
                label.push(part);
            }
        }
    }
    if config.include_text {
        for word in node.own_text().split_whitespace() {
            label.push(word);
        }
    }
    label
}
