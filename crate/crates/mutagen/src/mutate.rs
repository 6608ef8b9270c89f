use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use erratum_core::dom::{parse_html, to_html, DomTree, Element, NodeId, ParseConfig, DEFAULT_SIGNATURE_ATTR};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::{Category, MutagenError, MutationKind};

/// Operator-specific details of an applied mutation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Payload {
    /// Tag of the element inserted by a wrap.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wrapper: Option<String>,
    /// Signature given to the wrapper or to the root of a duplicate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub created: Option<String>,
    /// Signature of the other subtree of a swap.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sibling: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attribute: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub removed_words: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationOp {
    pub kind: MutationKind,
    /// Signature of the mutated node of the original tree.
    pub target: String,
    #[serde(default)]
    pub payload: Payload,
}

/// Where each original signature ended up in the mutant, in original
/// document order. `None` means the node is gone.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruth {
    entries: Vec<(String, Option<NodeId>)>,
    index: HashMap<String, usize>,
}

impl GroundTruth {
    pub fn from_entries(entries: Vec<(String, Option<NodeId>)>) -> GroundTruth {
        let index = entries.iter().enumerate().map(|(i, (s, _))| (s.clone(), i)).collect();
        GroundTruth { entries, index }
    }

    /// `None` for unknown signatures, `Some(None)` for deleted nodes.
    pub fn get(&self, signature: &str) -> Option<Option<NodeId>> {
        self.index.get(signature).map(|i| self.entries[*i].1)
    }

    pub fn entries(&self) -> &[(String, Option<NodeId>)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Serialize for GroundTruth {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.entries.len()))?;
        for (k, v) in &self.entries {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for GroundTruth {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let map = serde_json::Map::<String, serde_json::Value>::deserialize(d)?;
        let mut entries = Vec::with_capacity(map.len());
        for (k, v) in map {
            let node = Option::<NodeId>::deserialize(v).map_err(serde::de::Error::custom)?;
            entries.push((k, node));
        }
        Ok(GroundTruth::from_entries(entries))
    }
}

/// A generated version pair with its exact ground truth.
#[derive(Debug, Clone)]
pub struct MutantRecord {
    pub original: Arc<DomTree>,
    pub mutant: DomTree,
    pub ops: Vec<MutationOp>,
    pub ground_truth: GroundTruth,
    /// Applied operations divided by the original node count.
    pub ratio: f64,
    pub seed: u64,
    pub kinds: Vec<MutationKind>,
}

/// The part of a record stored next to the mutant HTML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RecordFile {
    pub ops: Vec<MutationOp>,
    pub ground_truth: GroundTruth,
    pub ratio: f64,
    pub seed: u64,
    #[serde(default)]
    pub kinds: Vec<MutationKind>,
}

impl MutantRecord {
    pub fn record_file(&self) -> RecordFile {
        RecordFile {
            ops: self.ops.clone(),
            ground_truth: self.ground_truth.clone(),
            ratio: self.ratio,
            seed: self.seed,
            kinds: self.kinds.clone(),
        }
    }

    /// Categories of the applied operations, deduplicated, in category order.
    pub fn categories(&self) -> Vec<Category> {
        let mut c: Vec<Category> = self.ops.iter().map(|o| o.kind.category()).collect();
        c.sort();
        c.dedup();
        c
    }
}

const DOCUMENT_TAGS: &[&str] = &["html", "head", "body"];
const TABLE_PARTS: &[&str] = &[
    "thead", "tbody", "tfoot", "tr", "td", "th", "caption", "colgroup", "col",
];
const SELECT_PARTS: &[&str] = &["option", "optgroup"];
const PHRASING: &[&str] = &[
    "a", "abbr", "b", "button", "cite", "code", "em", "i", "img", "input", "label", "select", "small", "span",
    "strong", "sub", "sup", "time", "textarea", "br", "svg",
];
const PHRASING_ONLY: &[&str] = &[
    "p", "h1", "h2", "h3", "h4", "h5", "h6", "span", "a", "button", "label", "em", "strong", "b", "i", "small", "code",
    "time", "abbr", "cite", "summary",
];

/// One node of the working tree, addressed by its child-index path.
struct Slot {
    path: Vec<usize>,
    original: bool,
    structural: bool,
    tag: String,
    parent_tag: Option<String>,
    siblings: usize,
    has_attrs: bool,
    has_words: bool,
    has_text: bool,
}

/// Element, child-index path, parent tag, sibling count, inside body.
type Visit<'a> = (&'a Element, Vec<usize>, Option<&'a str>, usize, bool);

fn slots(root: &Element, originals: &HashSet<String>) -> Vec<Slot> {
    let mut out = Vec::new();
    let document = root.tag == "html";
    let mut stack: Vec<Visit<'_>> = vec![(root, Vec::new(), None, 1, false)];
    while let Some((el, path, parent, siblings, in_body)) = stack.pop() {
        let is_body = el.tag == "body";
        let structural = if document {
            in_body && !DOCUMENT_TAGS.contains(&el.tag.as_str())
        } else {
            parent.is_some()
        };
        out.push(Slot {
            path: path.clone(),
            original: el.signature.as_ref().is_some_and(|s| originals.contains(s)),
            structural,
            tag: el.tag.clone(),
            parent_tag: parent.map(str::to_owned),
            siblings,
            has_attrs: !el.attrs.is_empty(),
            has_words: el.attrs.iter().any(|(_, v)| !v.trim().is_empty()),
            has_text: !el.text.trim().is_empty(),
        });
        for (i, c) in el.children.iter().enumerate().rev() {
            let mut p = path.clone();
            p.push(i);
            stack.push((c, p, Some(&el.tag), el.children.len(), in_body || is_body));
        }
    }
    out
}

fn eligible(slot: &Slot, kind: MutationKind) -> bool {
    use MutationKind::*;
    if !slot.original {
        return false;
    }
    let tag = slot.tag.as_str();
    let parent = slot.parent_tag.as_deref().unwrap_or("");
    match kind {
        StructureRemove | StructureDuplicate => slot.structural,
        StructureWrap => {
            slot.structural
                && !TABLE_PARTS.contains(&tag)
                && !SELECT_PARTS.contains(&tag)
                && !matches!(
                    parent,
                    "table" | "thead" | "tbody" | "tfoot" | "tr" | "select" | "optgroup"
                )
        }
        StructureUnwrap => {
            slot.structural
                && tag != "table"
                && tag != "select"
                && !TABLE_PARTS.contains(&tag)
                && !SELECT_PARTS.contains(&tag)
                && !matches!(parent, "table" | "select")
        }
        StructureSwap => slot.structural && slot.siblings >= 2,
        AttributeRemove => slot.has_attrs,
        AttributeRemoveWords => slot.has_words,
        ContentReplaceRandom | ContentChangeLetters | ContentRemove | ContentRemoveWords => slot.has_text,
    }
}

fn node_mut<'a>(root: &'a mut Element, path: &[usize]) -> &'a mut Element {
    path.iter().fold(root, |e, i| &mut e.children[*i])
}

fn parent_mut<'a>(root: &'a mut Element, path: &[usize]) -> (&'a mut Element, usize) {
    let (last, up) = path.split_last().expect("structural nodes are never the root");
    (node_mut(root, up), *last)
}

struct Fresh<'a> {
    originals: &'a HashSet<String>,
    next: usize,
}

impl Fresh<'_> {
    fn signature(&mut self) -> String {
        loop {
            let s = format!("new{}", self.next);
            self.next += 1;
            if !self.originals.contains(&s) {
                return s;
            }
        }
    }

    fn resign(&mut self, el: &mut Element) {
        el.signature = Some(self.signature());
        for c in &mut el.children {
            self.resign(c);
        }
    }
}

const WORDS: &[&str] = &[
    "alpha", "bravo", "delta", "echo", "harbor", "island", "jasper", "kilo", "lumen", "metro", "nova", "orbit",
    "pixel", "quartz", "river", "sierra", "tango", "umbra", "vivid", "willow",
];

/// Removes between one and all-but-one (at least one) random words.
fn drop_words(rng: &mut impl Rng, value: &str) -> (String, Vec<String>) {
    let words: Vec<&str> = value.split_whitespace().collect();
    let k = rng.gen_range(1..=(words.len() - 1).max(1));
    let mut idx: Vec<usize> = (0..words.len()).collect();
    idx.shuffle(rng);
    let gone: HashSet<usize> = idx[..k].iter().copied().collect();
    let kept: Vec<&str> = (0..words.len())
        .filter(|i| !gone.contains(i))
        .map(|i| words[i])
        .collect();
    let mut removed: Vec<usize> = gone.into_iter().collect();
    removed.sort_unstable();
    (
        kept.join(" "),
        removed.into_iter().map(|i| words[i].to_owned()).collect(),
    )
}

fn change_letters(rng: &mut impl Rng, text: &str) -> String {
    let mut chars: Vec<char> = text.chars().collect();
    let letters: Vec<usize> = (0..chars.len()).filter(|i| chars[*i].is_alphanumeric()).collect();
    if letters.is_empty() {
        return format!("{text}{}", rng.gen_range('a'..='z'));
    }
    let n = (letters.len() / 5).max(1);
    for &i in letters.choose_multiple(rng, n) {
        let old = chars[i];
        let mut c = rng.gen_range('a'..='z');
        if c == old {
            c = if c == 'z' { 'a' } else { (c as u8 + 1) as char };
        }
        chars[i] = c;
    }
    chars.into_iter().collect()
}

fn apply(root: &mut Element, slot: &Slot, kind: MutationKind, rng: &mut impl Rng, fresh: &mut Fresh<'_>) -> MutationOp {
    use MutationKind::*;
    let mut payload = Payload::default();
    let target = node_mut(root, &slot.path)
        .signature
        .clone()
        .expect("eligible nodes are signed");
    match kind {
        StructureRemove => {
            let (parent, i) = parent_mut(root, &slot.path);
            parent.children.remove(i);
        }
        StructureDuplicate => {
            let (parent, i) = parent_mut(root, &slot.path);
            let mut copy = parent.children[i].clone();
            fresh.resign(&mut copy);
            payload.created = copy.signature.clone();
            parent.children.insert(i + 1, copy);
        }
        StructureWrap => {
            let phrasing = PHRASING.contains(&slot.tag.as_str())
                || slot.parent_tag.as_deref().is_some_and(|p| PHRASING_ONLY.contains(&p));
            let tag = if phrasing { "span" } else { "div" };
            let (parent, i) = parent_mut(root, &slot.path);
            let node = std::mem::take(&mut parent.children[i]);
            let mut wrapper = Element::new(tag).child(node);
            wrapper.signature = Some(fresh.signature());
            payload.wrapper = Some(tag.to_owned());
            payload.created = wrapper.signature.clone();
            parent.children[i] = wrapper;
        }
        StructureUnwrap => {
            let (parent, i) = parent_mut(root, &slot.path);
            let node = parent.children.remove(i);
            // The unwrapped node's own text stays with the parent.
            if !node.text.is_empty() {
                let mut t = std::mem::take(&mut parent.text);
                if !t.is_empty() {
                    t.push(' ');
                }
                t.push_str(&node.text);
                parent.text = t;
            }
            for (k, c) in node.children.into_iter().enumerate() {
                parent.children.insert(i + k, c);
            }
        }
        StructureSwap => {
            let (parent, i) = parent_mut(root, &slot.path);
            let mut j = rng.gen_range(0..parent.children.len() - 1);
            if j >= i {
                j += 1;
            }
            payload.sibling = parent.children[j].signature.clone();
            parent.children.swap(i, j);
        }
        AttributeRemove => {
            let node = node_mut(root, &slot.path);
            let k = rng.gen_range(0..node.attrs.len());
            payload.attribute = Some(node.attrs.remove(k).0);
        }
        AttributeRemoveWords => {
            let node = node_mut(root, &slot.path);
            let with_words: Vec<usize> = (0..node.attrs.len())
                .filter(|k| !node.attrs[*k].1.trim().is_empty())
                .collect();
            let k = *with_words.choose(rng).expect("eligible");
            let (kept, removed) = drop_words(rng, &node.attrs[k].1);
            node.attrs[k].1 = kept;
            payload.attribute = Some(node.attrs[k].0.clone());
            payload.removed_words = Some(removed);
        }
        ContentReplaceRandom => {
            let node = node_mut(root, &slot.path);
            let n = node.text.split_whitespace().count().max(1);
            let words: Vec<&str> = (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect();
            node.text = words.join(" ");
            payload.text = Some(node.text.clone());
        }
        ContentChangeLetters => {
            let node = node_mut(root, &slot.path);
            node.text = change_letters(rng, &node.text);
            payload.text = Some(node.text.clone());
        }
        ContentRemove => {
            node_mut(root, &slot.path).text.clear();
        }
        ContentRemoveWords => {
            let node = node_mut(root, &slot.path);
            let (kept, removed) = drop_words(rng, &node.text);
            node.text = kept;
            payload.removed_words = Some(removed);
        }
    }
    MutationOp { kind, target, payload }
}

/// Re-parses a tree from its serialization so that mutants look exactly like
/// pages read back from disk.
pub fn normalize(tree: &DomTree) -> Result<DomTree, MutagenError> {
    let config = ParseConfig {
        fragment: tree.node(tree.root()).tag() != "html",
        signature_attr: Some(tree.signature_attr().unwrap_or(DEFAULT_SIGNATURE_ATTR).to_owned()),
        ..ParseConfig::default()
    };
    Ok(parse_html(to_html(tree).as_bytes(), &config)?)
}

/// Applies `round(ratio * |tree|)` random operations drawn from `kinds`.
pub fn mutate(
    tree: &Arc<DomTree>,
    ratio: f64,
    kinds: &[MutationKind],
    seed: u64,
) -> Result<MutantRecord, MutagenError> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(MutagenError::Ratio(ratio));
    }
    if kinds.is_empty() {
        return Err(MutagenError::NoKinds);
    }
    let mut order: Vec<String> = Vec::with_capacity(tree.size());
    for n in tree.nodes() {
        order.push(n.signature().ok_or(MutagenError::Unsigned(n.id()))?.to_owned());
    }
    let originals: HashSet<String> = order.iter().cloned().collect();
    if originals.len() != order.len() {
        return Err(MutagenError::DuplicateSignature);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut root = tree.to_element(tree.root());
    let mut fresh = Fresh {
        originals: &originals,
        next: 0,
    };
    let count = (ratio * tree.size() as f64).round() as usize;
    let mut ops = Vec::with_capacity(count);
    for _ in 0..count {
        let current = slots(&root, &originals);
        let mut pool: Vec<MutationKind> = kinds.to_vec();
        loop {
            if pool.is_empty() {
                return Err(MutagenError::NoEligible);
            }
            let kind = pool[rng.gen_range(0..pool.len())];
            let candidates: Vec<&Slot> = current.iter().filter(|s| eligible(s, kind)).collect();
            if let Some(slot) = candidates.choose(&mut rng) {
                ops.push(apply(&mut root, slot, kind, &mut rng, &mut fresh));
                break;
            }
            pool.retain(|k| *k != kind);
        }
    }

    let sig_attr = tree.signature_attr().unwrap_or(DEFAULT_SIGNATURE_ATTR);
    let mutant = normalize(&DomTree::from_element(&root, Some(sig_attr)))?;
    let mut located: HashMap<&str, NodeId> = HashMap::with_capacity(mutant.size());
    for n in mutant.nodes() {
        if let Some(s) = n.signature() {
            located.insert(s, n.id());
        }
    }
    let entries = order
        .iter()
        .map(|s| (s.clone(), located.get(s.as_str()).copied()))
        .collect();
    let ground_truth = GroundTruth::from_entries(entries);
    Ok(MutantRecord {
        original: Arc::clone(tree),
        ratio: ops.len() as f64 / tree.size() as f64,
        mutant,
        ops,
        ground_truth,
        seed,
        kinds: kinds.to_vec(),
    })
}
