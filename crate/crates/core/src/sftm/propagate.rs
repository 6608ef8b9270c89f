use std::collections::HashSet;

use super::{SftmConfig, SimilarityTable, Stage};
use crate::dom::{DomTree, NodeId};
use crate::error::SftmError;

/// Turns `s0` into the final similarity `s`.
///
/// The candidate set is widened with the parent pair of every scored pair,
/// the root pair, and pairs obtained by aligning the children of the root
/// pair, of unambiguous pairs and of their same-tag ancestor pairs (same-tag
/// longest common subsequence, applied recursively). Each pass then computes
///
/// `s(e, e') = s0(e, e') + w * ŝ(parent pair) + w * child(e, e')`
///
/// where `ŝ` is the previous pass normalized by the best score in its row or
/// column. `child` sums, over the children of `e`, the best `ŝ` to a child of
/// `e'`, does the same from the side of `e'`, keeps the smaller sum and
/// divides it by the larger child count. The first pass uses `ŝ0`.
///
/// Pairs that become unambiguous only after propagation seed a second
/// round of alignment; the passes are rerun from `s0` if it adds pairs.
pub fn propagate(
    s0: &SimilarityTable,
    old: &DomTree,
    new: &DomTree,
    config: &SftmConfig,
) -> Result<SimilarityTable, SftmError> {
    s0.check(old, new)?;
    if s0.stage() != Stage::Initial {
        return Err(SftmError::Provenance);
    }

    let mut cand: Vec<(NodeId, NodeId)> = Vec::with_capacity(s0.len() * 2 + 1);
    cand.extend_from_slice(s0.pairs());
    for &(a, b) in s0.pairs() {
        if let (Some(pa), Some(pb)) = (old.node(a).parent(), new.node(b).parent()) {
            cand.push((pa, pb));
        }
    }
    let roots = (old.root(), new.root());
    if old.node(roots.0).tag() == new.node(roots.1).tag() {
        cand.push(roots);
    }
    if !config.align_children {
        cand.sort_unstable();
        cand.dedup();
        let s = passes(s0, old, new, config, &cand);
        return Ok(SimilarityTable::new(Stage::Propagated, old, new, cand, s));
    }

    let mut grow = Growth::default();
    let first = anchors(s0.iter(), old.size(), new.size());
    grow.extend(old, new, vec![roots], &first, &mut cand);
    cand.sort_unstable();
    cand.dedup();
    let s = passes(s0, old, new, config, &cand);

    // Pairs made unambiguous by propagation seed a second round.
    let second: Vec<_> = anchors(
        cand.iter().zip(&s).map(|(&(a, b), &v)| (a, b, v)),
        old.size(),
        new.size(),
    )
    .into_iter()
    .filter(|p| !grow.seeded.contains(p))
    .collect();
    let before = cand.len();
    grow.extend(old, new, Vec::new(), &second, &mut cand);
    cand.sort_unstable();
    cand.dedup();
    if cand.len() == before {
        return Ok(SimilarityTable::new(Stage::Propagated, old, new, cand, s));
    }
    let s = passes(s0, old, new, config, &cand);
    Ok(SimilarityTable::new(Stage::Propagated, old, new, cand, s))
}

/// Candidate pairs added by structural alignment, remembered across rounds.
#[derive(Default)]
struct Growth {
    seeded: HashSet<(NodeId, NodeId)>,
    climbed: HashSet<(NodeId, NodeId)>,
    aligned: HashSet<(NodeId, NodeId)>,
}

impl Growth {
    fn extend(
        &mut self,
        old: &DomTree,
        new: &DomTree,
        mut seeds: Vec<(NodeId, NodeId)>,
        anchors: &[(NodeId, NodeId)],
        cand: &mut Vec<(NodeId, NodeId)>,
    ) {
        for &(a, b) in anchors {
            self.seeded.insert((a, b));
            seeds.push((a, b));
            // Same-tag ancestor pairs of an anchor, up to the first tag mismatch.
            let (mut x, mut y) = (a, b);
            while let (Some(px), Some(py)) = (old.node(x).parent(), new.node(y).parent()) {
                if old.node(px).tag() != new.node(py).tag() || !self.climbed.insert((px, py)) {
                    break;
                }
                cand.push((px, py));
                seeds.push((px, py));
                (x, y) = (px, py);
            }
        }
        let mut stack = seeds;
        while let Some((a, b)) = stack.pop() {
            if !self.aligned.insert((a, b)) {
                continue;
            }
            for pair in align_children(old, new, a, b) {
                cand.push(pair);
                if !self.aligned.contains(&pair) {
                    stack.push(pair);
                }
            }
        }
    }
}

/// Runs the propagation passes over the sorted candidate set.
fn passes(
    s0: &SimilarityTable,
    old: &DomTree,
    new: &DomTree,
    config: &SftmConfig,
    cand: &[(NodeId, NodeId)],
) -> Vec<f64> {
    let n = cand.len();
    let mut base = vec![0.0; n];
    {
        let mut k = 0;
        for (i, p) in cand.iter().enumerate() {
            while k < s0.len() && s0.pairs()[k] < *p {
                k += 1;
            }
            if k < s0.len() && s0.pairs()[k] == *p {
                base[i] = s0.scores()[k];
            }
        }
    }

    let position = |p: (NodeId, NodeId)| cand.binary_search(&p).ok();
    let parent_of: Vec<Option<usize>> = cand
        .iter()
        .map(|&(a, b)| match (old.node(a).parent(), new.node(b).parent()) {
            (Some(pa), Some(pb)) => position((pa, pb)),
            _ => None,
        })
        .collect();

    // Child pairs grouped by parent pair, then by left (resp. right) child.
    let with_parent: Vec<usize> = (0..n).filter(|i| parent_of[*i].is_some()).collect();
    let mut by_left = with_parent.clone();
    by_left.sort_unstable_by_key(|i| (parent_of[*i], cand[*i].0));
    let mut by_right = with_parent;
    by_right.sort_unstable_by_key(|i| (parent_of[*i], cand[*i].1));
    let mut child_start = vec![0usize; n + 1];
    for &i in &by_left {
        child_start[parent_of[i].unwrap() + 1] += 1;
    }
    for j in 0..n {
        child_start[j + 1] += child_start[j];
    }
    let child_den: Vec<f64> = cand
        .iter()
        .map(|&(a, b)| old.node(a).children().len().max(new.node(b).children().len()) as f64)
        .collect();

    let w = config.propagation_weight;
    let count = config
        .passes
        .unwrap_or_else(|| old.max_depth().max(new.max_depth()) + 1);
    let mut s = base.clone();
    let mut hat = vec![0.0; n];
    let mut row_max = vec![0.0f64; old.size()];
    let mut col_max = vec![0.0f64; new.size()];
    let mut next = vec![0.0; n];
    for _ in 0..count {
        row_max.iter_mut().for_each(|m| *m = 0.0);
        col_max.iter_mut().for_each(|m| *m = 0.0);
        for (i, &(a, b)) in cand.iter().enumerate() {
            row_max[a.0] = row_max[a.0].max(s[i]);
            col_max[b.0] = col_max[b.0].max(s[i]);
        }
        for (i, &(a, b)) in cand.iter().enumerate() {
            let m = row_max[a.0].max(col_max[b.0]);
            hat[i] = if m > 0.0 { s[i] / m } else { 0.0 };
        }
        let mut delta = 0.0f64;
        for j in 0..n {
            let range = child_start[j]..child_start[j + 1];
            let from_left = best_child_sum(&by_left[range.clone()], &hat, |i| cand[i].0 .0);
            let from_right = best_child_sum(&by_right[range], &hat, |i| cand[i].1 .0);
            let mut child = from_left.min(from_right);
            if child > 0.0 {
                child /= child_den[j];
            }
            let parent = parent_of[j].map_or(0.0, |p| hat[p]);
            next[j] = base[j] + w * parent + w * child;
            delta = delta.max((next[j] - s[j]).abs());
        }
        std::mem::swap(&mut s, &mut next);
        if delta == 0.0 {
            break;
        }
    }

    s
}

/// Sum over groups of equal `key` of the best `hat` in the group.
fn best_child_sum(group: &[usize], hat: &[f64], key: impl Fn(usize) -> usize) -> f64 {
    let mut sum = 0.0;
    let mut k = 0;
    while k < group.len() {
        let g = key(group[k]);
        let mut best = 0.0f64;
        while k < group.len() && key(group[k]) == g {
            best = best.max(hat[group[k]]);
            k += 1;
        }
        sum += best;
    }
    sum
}

/// Pairs whose score is strictly the best in both their row and column.
fn anchors(
    scores: impl Iterator<Item = (NodeId, NodeId, f64)> + Clone,
    n_left: usize,
    n_right: usize,
) -> Vec<(NodeId, NodeId)> {
    // (best score, number of pairs reaching it)
    let mut row = vec![(0.0f64, 0u32); n_left];
    let mut col = vec![(0.0f64, 0u32); n_right];
    let bump = |slot: &mut (f64, u32), s: f64| {
        if s > slot.0 {
            *slot = (s, 1);
        } else if s == slot.0 {
            slot.1 += 1;
        }
    };
    for (a, b, s) in scores.clone() {
        bump(&mut row[a.0], s);
        bump(&mut col[b.0], s);
    }
    scores
        .filter(|&(a, b, s)| s > 0.0 && row[a.0] == (s, 1) && col[b.0] == (s, 1))
        .map(|(a, b, _)| (a, b))
        .collect()
}

/// Longest common subsequence of the children of `a` and `b` by tag. Among
/// subsequences of maximal length, the one pairing the most children with
/// equal attributes and own text is kept.
fn align_children(old: &DomTree, new: &DomTree, a: NodeId, b: NodeId) -> Vec<(NodeId, NodeId)> {
    let xs = old.node(a).children();
    let ys = new.node(b).children();
    if xs.is_empty() || ys.is_empty() {
        return Vec::new();
    }
    let (n, m) = (xs.len(), ys.len());
    // Length in the high bits, label agreement in the low bits.
    let weight = |i: usize, j: usize| {
        let (x, y) = (old.node(xs[i]), new.node(ys[j]));
        if x.tag() != y.tag() {
            return 0;
        }
        (1u64 << 32) + u64::from(x.attrs() == y.attrs()) + u64::from(x.own_text() == y.own_text())
    };
    // best[i][j] = best total weight of xs[i..] and ys[j..]
    let mut best = vec![0u64; (n + 1) * (m + 1)];
    let at = |i: usize, j: usize| i * (m + 1) + j;
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            let skip = best[at(i + 1, j)].max(best[at(i, j + 1)]);
            let w = weight(i, j);
            best[at(i, j)] = if w > 0 {
                skip.max(best[at(i + 1, j + 1)] + w)
            } else {
                skip
            };
        }
    }
    let mut pairs = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        let w = weight(i, j);
        if w > 0 && best[at(i, j)] == best[at(i + 1, j + 1)] + w {
            pairs.push((xs[i], ys[j]));
            i += 1;
            j += 1;
        } else if best[at(i + 1, j)] >= best[at(i, j + 1)] {
            i += 1;
        } else {
            j += 1;
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::Element;
    use crate::sftm::initial_similarity;

    fn chain() -> DomTree {
        DomTree::from_element(
            &Element::new("div").child(Element::new("div").child(Element::new("div"))),
            None,
        )
    }

    #[test]
    fn chain_middle_pair_gains() {
        let t = chain();
        let cfg = SftmConfig::default();
        let (_, s0) = initial_similarity(&t, &t, &cfg).unwrap();
        let s = propagate(&s0, &t, &t, &cfg).unwrap();
        let mid = (NodeId(1), NodeId(1));
        assert!(s.score(mid.0, mid.1) > s0.score(mid.0, mid.1));
        // Hand evaluation of the first pass: every s0 entry is 1/9, so every
        // normalized entry is 1 and the middle pair gets both bonuses.
        let one = SftmConfig {
            passes: Some(1),
            ..SftmConfig::default()
        };
        let s1 = propagate(&s0, &t, &t, &one).unwrap();
        assert!((s1.score(mid.0, mid.1) - (1.0 / 9.0 + 0.4 + 0.4)).abs() < 1e-12);
        assert_eq!(s1.stage(), Stage::Propagated);
    }

    #[test]
    fn single_nodes_are_unchanged() {
        let t = DomTree::from_element(&Element::new("p"), None);
        let cfg = SftmConfig::default();
        let (_, s0) = initial_similarity(&t, &t, &cfg).unwrap();
        let s = propagate(&s0, &t, &t, &cfg).unwrap();
        assert_eq!(s.iter().collect::<Vec<_>>(), s0.iter().collect::<Vec<_>>());
    }

    #[test]
    fn foreign_table_is_rejected() {
        let t = chain();
        let other = DomTree::from_element(&Element::new("p"), None);
        let cfg = SftmConfig::default();
        let (_, s0) = initial_similarity(&t, &t, &cfg).unwrap();
        assert!(matches!(propagate(&s0, &t, &other, &cfg), Err(SftmError::Provenance)));
        let s = propagate(&s0, &t, &t, &cfg).unwrap();
        assert!(matches!(propagate(&s, &t, &t, &cfg), Err(SftmError::Provenance)));
    }

    #[test]
    fn lcs_alignment_skips_inserted_children() {
        let old = DomTree::from_element(
            &Element::new("ul").child(Element::new("li")).child(Element::new("li")),
            None,
        );
        let new = DomTree::from_element(
            &Element::new("ul")
                .child(Element::new("p"))
                .child(Element::new("li"))
                .child(Element::new("li")),
            None,
        );
        let pairs = align_children(&old, &new, NodeId(0), NodeId(0));
        assert_eq!(pairs, [(NodeId(1), NodeId(2)), (NodeId(2), NodeId(3))]);
    }

    #[test]
    fn alignment_prefers_equal_labels() {
        let old = DomTree::from_element(
            &Element::new("div")
                .child(Element::new("button").attr("class", "reply").text("Reply"))
                .child(Element::new("button").attr("class", "like").text("Like")),
            None,
        );
        let new = DomTree::from_element(
            &Element::new("div").child(Element::new("button").attr("class", "like").text("Like")),
            None,
        );
        let pairs = align_children(&old, &new, NodeId(0), NodeId(0));
        assert_eq!(pairs, [(NodeId(2), NodeId(1))]);
    }
}
