use ego_tree::NodeRef;
use scraper::{Html, Node};
use serde::{Deserialize, Serialize};

use super::{DomTree, Element, DEFAULT_SIGNATURE_ATTR};
use crate::error::DomError;

/// Controls how HTML is turned into a canonical tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase")]
pub struct ParseConfig {
    /// Elements removed together with their subtree.
    pub dropped_tags: Vec<String>,
    /// Drop a `head` element that has no children and no attributes (the
    /// parser synthesizes one for every document).
    pub drop_empty_head: bool,
    /// Parse the input as a body fragment whose single top-level element
    /// becomes the root, instead of a full document rooted at `html`.
    pub fragment: bool,
    /// Attribute moved out of the attribute list into the node signature.
    pub signature_attr: Option<String>,
    /// Elements whose `id` is listed here are dropped with their subtree.
    pub denied_ids: Vec<String>,
    /// Elements carrying any of these classes are dropped with their subtree.
    pub denied_classes: Vec<String>,
}

impl Default for ParseConfig {
    fn default() -> Self {
        ParseConfig {
            dropped_tags: ["script", "style", "noscript", "template"].map(String::from).to_vec(),
            drop_empty_head: true,
            fragment: false,
            signature_attr: Some(DEFAULT_SIGNATURE_ATTR.to_owned()),
            denied_ids: Vec::new(),
            denied_classes: Vec::new(),
        }
    }
}

impl ParseConfig {
    pub fn fragment() -> Self {
        ParseConfig {
            fragment: true,
            ..ParseConfig::default()
        }
    }
}

/// Parses HTML into a [`DomTree`]. Malformed markup is repaired by the
/// standard HTML5 tree-construction algorithm; only inputs without any
/// element are rejected.
pub fn parse_html(html: &[u8], config: &ParseConfig) -> Result<DomTree, DomError> {
    let text = String::from_utf8_lossy(html);
    if text.trim().is_empty() {
        return Err(DomError::EmptyInput);
    }
    let root = if config.fragment {
        let doc = Html::parse_fragment(&text);
        // parse_fragment yields Fragment > html > content
        let html_el = doc
            .tree
            .root()
            .children()
            .find(|n| n.value().is_element())
            .ok_or(DomError::NoRoot)?;
        let tops: Vec<Element> = html_el.children().filter_map(|c| convert(c, config)).collect();
        match tops.len() {
            0 => return Err(DomError::NoRoot),
            1 => tops.into_iter().next().unwrap(),
            n => return Err(DomError::FragmentRoots(n)),
        }
    } else {
        let doc = Html::parse_document(&text);
        let html_el = doc
            .tree
            .root()
            .children()
            .find(|n| n.value().is_element())
            .ok_or(DomError::NoRoot)?;
        convert(html_el, config).ok_or(DomError::NoRoot)?
    };
    Ok(DomTree::from_element(&root, config.signature_attr.as_deref()))
}

fn convert(node: NodeRef<'_, Node>, config: &ParseConfig) -> Option<Element> {
    let el = node.value().as_element()?;
    let tag = el.name().to_ascii_lowercase();
    if config.dropped_tags.contains(&tag) {
        return None;
    }
    let mut attrs = Vec::new();
    let mut signature = None;
    for (qual, value) in el.attrs.iter() {
        let name = match &qual.prefix {
            Some(p) => format!("{}:{}", p, qual.local),
            None => qual.local.to_string(),
        };
        if config.signature_attr.as_deref() == Some(name.as_str()) {
            signature = Some(value.to_string());
            continue;
        }
        if name == "id" && config.denied_ids.iter().any(|d| d == value.as_ref()) {
            return None;
        }
        if name == "class"
            && value
                .split_whitespace()
                .any(|c| config.denied_classes.iter().any(|d| d == c))
        {
            return None;
        }
        attrs.push((name, value.to_string()));
    }

    let mut text = String::new();
    let mut children = Vec::new();
    for child in node.children() {
        match child.value() {
            Node::Text(t) => push_words(&mut text, t),
            Node::Element(_) => children.extend(convert(child, config)),
            _ => {}
        }
    }
    if tag == "head" && config.drop_empty_head && children.is_empty() && attrs.is_empty() {
        return None;
    }
    Some(Element {
        tag,
        attrs,
        text,
        signature,
        children,
    })
}

/// Appends `raw` to `buf` with whitespace runs collapsed to single spaces.
pub(crate) fn push_words(buf: &mut String, raw: &str) {
    for word in raw.split_whitespace() {
        if !buf.is_empty() {
            buf.push(' ');
        }
        buf.push_str(word);
    }
}
