//! Canonical DOM trees.
//!
//! A [`DomTree`] is an immutable, ordered, labeled tree of element nodes.
//! Node ids are dense and assigned in document (pre-)order, so `id < id'`
//! means "appears earlier in the source document" and the descendants of a
//! node occupy the contiguous id range `id..node.subtree_end()`.

mod html;
mod json;
mod label;
mod parse;
mod xpath;

use std::cell::Cell;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use html::to_html;
pub use json::{tree_from_json, tree_to_json};
pub use label::{tokenize, Label, TokenizerConfig};
pub use parse::{parse_html, ParseConfig};
pub use xpath::{absolute_xpath, eval_xpath, XPathLocator};

use crate::error::DomError;

/// Attribute carrying ground-truth signatures in generated datasets.
pub const DEFAULT_SIGNATURE_ATTR: &str = "data-erratum-sig";

/// Index of a node inside its [`DomTree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

thread_local! {
    static SIGNATURE_READS: Cell<u64> = const { Cell::new(0) };
}

/// Number of signature reads performed through [`DomNode::signature`] on the
/// current thread. Matching and baseline code must never move this counter.
pub fn signature_reads() -> u64 {
    SIGNATURE_READS.with(Cell::get)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomNode {
    id: NodeId,
    tag: String,
    attrs: Vec<(String, String)>,
    own_text: String,
    signature: Option<String>,
    sibling_index: usize,
    parent: Option<NodeId>,
    children: Vec<NodeId>,
    depth: usize,
    subtree_end: usize,
}

impl DomNode {
    pub fn id(&self) -> NodeId {
        self.id
    }

    /// Lowercase element name.
    pub fn tag(&self) -> &str {
        &self.tag
    }

    /// Attributes in source order. Never contains the signature attribute.
    pub fn attrs(&self) -> &[(String, String)] {
        &self.attrs
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_str())
    }

    /// Text directly under this element, whitespace-normalized. Text of child
    /// elements is not included.
    pub fn own_text(&self) -> &str {
        &self.own_text
    }

    /// Ground-truth signature. Reads are counted, see [`signature_reads`].
    pub fn signature(&self) -> Option<&str> {
        SIGNATURE_READS.with(|c| c.set(c.get() + 1));
        self.signature.as_deref()
    }

    /// 1-based position among siblings sharing this node's tag.
    pub fn sibling_index(&self) -> usize {
        self.sibling_index
    }

    pub fn parent(&self) -> Option<NodeId> {
        self.parent
    }

    pub fn children(&self) -> &[NodeId] {
        &self.children
    }

    /// Root has depth 0.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// One past the id of the last descendant.
    pub fn subtree_end(&self) -> usize {
        self.subtree_end
    }

    pub fn subtree_size(&self) -> usize {
        self.subtree_end - self.id.0
    }
}

/// Immutable canonical DOM tree.
#[derive(Debug, Clone)]
pub struct DomTree {
    nodes: Vec<DomNode>,
    signature_attr: Option<String>,
    digest: OnceLock<String>,
}

impl PartialEq for DomTree {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.signature_attr == other.signature_attr
    }
}

impl Eq for DomTree {}

impl DomTree {
    /// Builds a tree from an owned element hierarchy, assigning ids in
    /// pre-order.
    pub fn from_element(root: &Element, signature_attr: Option<&str>) -> DomTree {
        let mut nodes = Vec::new();
        // (element, parent, depth, sibling index)
        let mut stack: Vec<(&Element, Option<NodeId>, usize, usize)> = vec![(root, None, 0, 1)];
        while let Some((el, parent, depth, sibling_index)) = stack.pop() {
            let id = NodeId(nodes.len());
            if let Some(p) = parent {
                let p: &mut DomNode = &mut nodes[p.0];
                p.children.push(id);
            }
            nodes.push(DomNode {
                id,
                tag: el.tag.clone(),
                attrs: el.attrs.clone(),
                own_text: el.text.clone(),
                signature: el.signature.clone(),
                sibling_index,
                parent,
                children: Vec::with_capacity(el.children.len()),
                depth,
                subtree_end: 0,
            });
            let indices = same_tag_indices(el.children.iter().map(|c| c.tag.as_str()));
            for (child, k) in el.children.iter().zip(indices).rev() {
                stack.push((child, Some(id), depth + 1, k));
            }
        }
        for i in (0..nodes.len()).rev() {
            let end = nodes[i].children.last().map_or(i + 1, |c| nodes[c.0].subtree_end);
            nodes[i].subtree_end = end;
        }
        DomTree {
            nodes,
            signature_attr: signature_attr.map(str::to_owned),
            digest: OnceLock::new(),
        }
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    /// Number of element nodes.
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: NodeId) -> &DomNode {
        &self.nodes[id.0]
    }

    pub fn get(&self, id: NodeId) -> Option<&DomNode> {
        self.nodes.get(id.0)
    }

    pub fn checked(&self, id: NodeId) -> Result<&DomNode, DomError> {
        self.get(id).ok_or(DomError::UnknownNode(id))
    }

    /// Nodes in document order.
    pub fn nodes(&self) -> &[DomNode] {
        &self.nodes
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn signature_attr(&self) -> Option<&str> {
        self.signature_attr.as_deref()
    }

    pub fn max_depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// `true` when `ancestor` is `node` or one of its ancestors.
    pub fn contains(&self, ancestor: NodeId, node: NodeId) -> bool {
        let a = &self.nodes[ancestor.0];
        node.0 >= ancestor.0 && node.0 < a.subtree_end
    }

    /// Finds the node carrying `signature`.
    pub fn find_signature(&self, signature: &str) -> Option<NodeId> {
        self.nodes
            .iter()
            .find(|n| n.signature.as_deref() == Some(signature))
            .map(|n| n.id)
    }

    /// Copies the subtree rooted at `id` back into an owned element.
    pub fn to_element(&self, id: NodeId) -> Element {
        let n = &self.nodes[id.0];
        Element {
            tag: n.tag.clone(),
            attrs: n.attrs.clone(),
            text: n.own_text.clone(),
            signature: n.signature.clone(),
            children: n.children.iter().map(|c| self.to_element(*c)).collect(),
        }
    }

    /// Hex SHA-256 over structure, tags, attributes and text. Signatures are
    /// not part of the digest.
    pub fn digest(&self) -> &str {
        self.digest.get_or_init(|| {
            let mut h = Sha256::new();
            for n in &self.nodes {
                h.update(n.parent.map_or(u64::MAX, |p| p.0 as u64).to_le_bytes());
                h.update(n.tag.as_bytes());
                h.update([0]);
                for (k, v) in &n.attrs {
                    h.update(k.as_bytes());
                    h.update([1]);
                    h.update(v.as_bytes());
                    h.update([2]);
                }
                h.update([3]);
                h.update(n.own_text.as_bytes());
                h.update([4]);
            }
            hex::encode(h.finalize())
        })
    }
}

fn same_tag_indices<'a>(tags: impl Iterator<Item = &'a str>) -> Vec<usize> {
    let mut seen: Vec<(&str, usize)> = Vec::new();
    tags.map(|t| match seen.iter_mut().find(|(s, _)| *s == t) {
        Some((_, k)) => {
            *k += 1;
            *k
        }
        None => {
            seen.push((t, 1));
            1
        }
    })
    .collect()
}

/// Owned, mutable element hierarchy. Used to build trees and by the mutation
/// generator; convert with [`DomTree::from_element`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Element {
    pub tag: String,
    pub attrs: Vec<(String, String)>,
    pub text: String,
    pub signature: Option<String>,
    pub children: Vec<Element>,
}

impl Element {
    pub fn new(tag: impl Into<String>) -> Element {
        Element {
            tag: tag.into(),
            ..Element::default()
        }
    }

    pub fn attr(mut self, name: impl Into<String>, value: impl Into<String>) -> Element {
        self.attrs.push((name.into(), value.into()));
        self
    }

    pub fn text(mut self, text: impl Into<String>) -> Element {
        self.text = text.into();
        self
    }

    pub fn child(mut self, child: Element) -> Element {
        self.children.push(child);
        self
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Element::size).sum::<usize>()
    }
}
