//! Canonical tree JSON:
//! `{"root": 0, "signatureAttr": "...", "nodes": [{"id", "tag", "attrs", "text", "children"}]}`.
//! Signatures are written as a regular attribute named by `signatureAttr`.

use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{DomTree, Element};
use crate::error::DomError;

#[derive(Debug, Clone, Default, PartialEq)]
struct OrderedAttrs(Vec<(String, String)>);

impl Serialize for OrderedAttrs {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for OrderedAttrs {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = OrderedAttrs;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map of attribute names to string values")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<OrderedAttrs, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, String>()? {
                    out.push((k, v));
                }
                Ok(OrderedAttrs(out))
            }
        }
        d.deserialize_map(V)
    }
}

#[derive(Serialize, Deserialize)]
struct JsonNode {
    id: usize,
    tag: String,
    #[serde(default)]
    attrs: OrderedAttrs,
    #[serde(default)]
    text: String,
    #[serde(default)]
    children: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct JsonTree {
    root: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    signature_attr: Option<String>,
    nodes: Vec<JsonNode>,
}

pub fn tree_to_json(tree: &DomTree) -> serde_json::Value {
    let sig_attr = tree.signature_attr();
    let nodes = tree
        .nodes()
        .iter()
        .map(|n| {
            let mut attrs = n.attrs.clone();
            if let (Some(name), Some(sig)) = (sig_attr, &n.signature) {
                attrs.push((name.to_owned(), sig.clone()));
            }
            JsonNode {
                id: n.id.0,
                tag: n.tag.clone(),
                attrs: OrderedAttrs(attrs),
                text: n.own_text.clone(),
                children: n.children.iter().map(|c| c.0).collect(),
            }
        })
        .collect();
    serde_json::to_value(JsonTree {
        root: tree.root().0,
        signature_attr: sig_attr.map(str::to_owned),
        nodes,
    })
    .expect("tree json is always serializable")
}

/// Reads canonical tree JSON. Node ids may be in any order; the returned tree
/// is renumbered in document order.
pub fn tree_from_json(value: &serde_json::Value) -> Result<DomTree, DomError> {
    let raw: JsonTree = serde_json::from_value(value.clone()).map_err(|e| DomError::Json(e.to_string()))?;
    let mut slot = vec![usize::MAX; raw.nodes.iter().map(|n| n.id + 1).max().unwrap_or(0)];
    for (i, n) in raw.nodes.iter().enumerate() {
        if slot[n.id] != usize::MAX {
            return Err(DomError::Json(format!("duplicate node id {}", n.id)));
        }
        slot[n.id] = i;
    }
    let lookup = |id: usize| -> Result<&JsonNode, DomError> {
        slot.get(id)
            .filter(|s| **s != usize::MAX)
            .map(|s| &raw.nodes[*s])
            .ok_or_else(|| DomError::Json(format!("unknown node id {id}")))
    };
    let mut visited = vec![false; slot.len()];
    let sig_attr = raw.signature_attr.as_deref();

    fn build<'a>(
        id: usize,
        lookup: &dyn Fn(usize) -> Result<&'a JsonNode, DomError>,
        visited: &mut [bool],
        sig_attr: Option<&str>,
    ) -> Result<Element, DomError> {
        let n = lookup(id)?;
        if std::mem::replace(&mut visited[id], true) {
            return Err(DomError::Json(format!("node {id} reachable twice")));
        }
        if n.tag.is_empty() {
            return Err(DomError::Json(format!("node {id} has an empty tag")));
        }
        let mut el = Element::new(n.tag.clone()).text(n.text.clone());
        for (k, v) in &n.attrs.0 {
            if Some(k.as_str()) == sig_attr {
                el.signature = Some(v.clone());
            } else {
                el.attrs.push((k.clone(), v.clone()));
            }
        }
        for c in &n.children {
            el.children.push(build(*c, lookup, visited, sig_attr)?);
        }
        Ok(el)
    }

    lookup(raw.root)?;
    let root = build(raw.root, &lookup, &mut visited, sig_attr)?;
    if raw.nodes.iter().any(|n| !visited[n.id]) {
        return Err(DomError::Json("nodes unreachable from root".into()));
    }
    Ok(DomTree::from_element(&root, sig_attr))
}
