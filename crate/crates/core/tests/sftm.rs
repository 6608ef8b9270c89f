mod common;

use std::time::Instant;

use common::*;
use erratum_core::dom::{signature_reads, DomTree, NodeId};
use erratum_core::sftm::{initial_similarity, match_trees, optimize, propagate, SftmConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ids(pairs: &[(usize, usize)]) -> Vec<(NodeId, NodeId)> {
    pairs.iter().map(|&(a, b)| (NodeId(a), NodeId(b))).collect()
}

#[test]
fn figure_four_token_weights() {
    let (old, new) = (fragment(FIG_OLD), fragment(FIG_NEW));
    let (index, _) = initial_similarity(&old, &new, &SftmConfig::default()).unwrap();
    let div = index.get("div").unwrap();
    // div is on every div of both snippets: 3 * 5 occurrences
    assert!((div.weight - 1.0 / 15.0).abs() < 1e-12);
    assert_eq!(index.get("item__subtitle").unwrap().weight, 1.0);
    // content-info__item only exists in D
    assert!(!index.get("content-info__item").unwrap().is_live());
}

#[test]
fn figure_four_propagation_prefers_similar_parents() {
    let (old, new) = (fragment(FIG_OLD), fragment(FIG_NEW));
    let cfg = SftmConfig::default();
    let (_, s0) = initial_similarity(&old, &new, &cfg).unwrap();
    let (a1, a1n, a2n) = (NodeId(3), NodeId(4), NodeId(6));
    assert_eq!(s0.score(a1, a1n), s0.score(a1, a2n));
    for passes in [Some(1), None] {
        let cfg = SftmConfig { passes, ..cfg.clone() };
        let s = propagate(&s0, &old, &new, &cfg).unwrap();
        assert!(s.score(a1, a1n) > s.score(a1, a2n));
    }
}

#[test]
fn figure_four_matching() {
    let (old, new) = (fragment(FIG_OLD), fragment(FIG_NEW));
    let m = match_trees(&old, &new, &SftmConfig::default()).unwrap();
    let got: Vec<_> = m.pairs.iter().map(|p| (p.left, p.right)).collect();
    // div1-div'1, div2-div'2, div3-div'3, a1-a'1
    assert_eq!(got, ids(&[(0, 1), (1, 2), (2, 3), (3, 4)]));
    assert_eq!(m.unmatched_right, [NodeId(0), NodeId(5), NodeId(6)]);
    assert!(m.unmatched_left.is_empty());
}

#[test]
fn empty_table_leaves_everything_unmatched() {
    let (old, new) = (fragment("<p></p>"), fragment("<b><i></i></b>"));
    let m = match_trees(&old, &new, &SftmConfig::default()).unwrap();
    assert!(m.is_empty());
    assert_eq!(m.unmatched_left.len(), 1);
    assert_eq!(m.unmatched_right.len(), 2);
    assert_eq!(m.total_score, 0.0);
}

fn assert_identity(t: &DomTree, cfg: &SftmConfig) {
    let m = match_trees(t, t, cfg).unwrap();
    assert_eq!(m.len(), t.size(), "unmatched: {:?}", m.unmatched_left);
    for p in &m.pairs {
        assert_eq!(p.left, p.right);
    }
    let (_, s0) = initial_similarity(t, t, cfg).unwrap();
    let s = propagate(&s0, t, t, cfg).unwrap();
    let diag: f64 = t.ids().map(|n| s.score(n, n)).sum();
    assert!((m.total_score - diag).abs() <= 1e-9 * diag.max(1.0));
}

#[test]
fn identity_on_pages_and_snippets() {
    assert_identity(&fragment(FIG_OLD), &SftmConfig::default());
    assert_identity(&fragment(FIG_NEW), &SftmConfig::default());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [50, 400, 1500] {
        let page = DomTree::from_element(&synthetic_page(&mut rng, n), None);
        assert_identity(&page, &SftmConfig::default());
    }
}

#[test]
fn identity_on_random_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..40 {
        let t = DomTree::from_element(&random_tree(&mut rng, n), None);
        assert_identity(&t, &SftmConfig::default());
    }
}

#[test]
fn matching_never_reads_signatures() {
    let sig = erratum_core::dom::ParseConfig::default();
    let html = r#"<html><body><div data-erratum-sig="s1"><a href="/x" data-erratum-sig="s2">x</a></div></body></html>"#;
    let t = erratum_core::dom::parse_html(html.as_bytes(), &sig).unwrap();
    let before = signature_reads();
    match_trees(&t, &t, &SftmConfig::default()).unwrap();
    assert_eq!(signature_reads(), before);
}

#[test]
fn large_pair_matches_quickly() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let page = synthetic_page(&mut rng, 1500);
    let old = DomTree::from_element(&page, None);
    let new = DomTree::from_element(&perturb(&mut rng, &page, 150), None);
    assert!(old.size() >= 1500);
    let start = Instant::now();
    let m = match_trees(&old, &new, &SftmConfig::default()).unwrap();
    let took = start.elapsed();
    assert!(took.as_secs_f64() < 10.0, "took {took:?}");
    assert!(
        m.len() > new.size().min(old.size()) / 2,
        "{} of {}/{}",
        m.len(),
        old.size(),
        new.size()
    );
}

/// Exhaustive maximum of `sum(s - penalty)` over injective matchings of the
/// candidate pairs.
fn brute_force(s: &[(usize, usize, f64)], n_left: usize, penalty: f64) -> f64 {
    fn go(left: usize, n_left: usize, rows: &[Vec<(usize, f64)>], used: &mut Vec<bool>, penalty: f64) -> f64 {
        if left == n_left {
            return 0.0;
        }
        let mut best = go(left + 1, n_left, rows, used, penalty);
        for &(r, v) in &rows[left] {
            if !used[r] {
                used[r] = true;
                best = best.max(v - penalty + go(left + 1, n_left, rows, used, penalty));
                used[r] = false;
            }
        }
        best
    }
    let mut rows = vec![Vec::new(); n_left];
    let mut n_right = 0;
    for &(a, b, v) in s {
        rows[a].push((b, v));
        n_right = n_right.max(b + 1);
    }
    go(0, n_left, &rows, &mut vec![false; n_right], penalty)
}

#[test]
fn metropolis_against_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut good = 0;
    let total = 200;
    for i in 0..total {
        let n = 2 + i % 7;
        let a = random_tree(&mut rng, n);
        let b = if i % 3 == 0 {
            random_tree(&mut rng, 2 + (i * 5) % 7)
        } else {
            let p = perturb(&mut rng, &a, 1 + i % 3);
            if p.size() > 8 {
                a.clone()
            } else {
                p
            }
        };
        let (old, new) = (DomTree::from_element(&a, None), DomTree::from_element(&b, None));
        let cfg = SftmConfig::default().with_seed(i as u64);
        let (_, s0) = initial_similarity(&old, &new, &cfg).unwrap();
        let s = propagate(&s0, &old, &new, &cfg).unwrap();
        let m = optimize(&s, &old, &new, &cfg).unwrap();
        let triples: Vec<_> = s.iter().map(|(a, b, v)| (a.0, b.0, v)).collect();
        let opt = brute_force(&triples, old.size(), m.penalty);
        let got = m.objective();
        assert!(got <= opt + 1e-9, "instance {i}: {got} > optimum {opt}");
        if got >= 0.9 * opt - 1e-12 {
            good += 1;
        }
    }
    assert!(good * 100 >= total * 95, "{good}/{total} within 90% of optimum");
}

#[test]
fn fixed_seed_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let page = synthetic_page(&mut rng, 300);
    let old = DomTree::from_element(&page, None);
    let new = DomTree::from_element(&perturb(&mut rng, &page, 40), None);
    let cfg = SftmConfig::default().with_seed(99);
    let a = match_trees(&old, &new, &cfg).unwrap().to_json();
    let b = match_trees(&old, &new, &cfg).unwrap().to_json();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn matching_json_shape() {
    let t = fragment(FIG_OLD);
    let v = match_trees(&t, &t, &SftmConfig::default()).unwrap().to_json();
    for key in [
        "pairs",
        "unmatchedLeft",
        "unmatchedRight",
        "totalScore",
        "config",
        "seed",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["pairs"][0]["left"], 0);
    assert_eq!(v["pairs"][0]["right"], 0);
}

#[test]
fn invalid_config_is_rejected() {
    let t = fragment(FIG_OLD);
    let cfg = SftmConfig {
        cooling: 1.5,
        ..SftmConfig::default()
    };
    assert!(match_trees(&t, &t, &cfg).is_err());
    let cfg = SftmConfig {
        propagation_weight: 0.0,
        ..SftmConfig::default()
    };
    assert!(match_trees(&t, &t, &cfg).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matchings_are_injective(seed in any::<u64>(), n in 1usize..30, edits in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_tree(&mut rng, n);
        let b = perturb(&mut rng, &a, edits);
        let (old, new) = (DomTree::from_element(&a, None), DomTree::from_element(&b, None));
        let m = match_trees(&old, &new, &SftmConfig::default().with_seed(seed)).unwrap();
        let mut l = vec![false; old.size()];
        let mut r = vec![false; new.size()];
        for p in &m.pairs {
            prop_assert!(!std::mem::replace(&mut l[p.left.0], true));
            prop_assert!(!std::mem::replace(&mut r[p.right.0], true));
        }
        prop_assert_eq!(m.pairs.len() + m.unmatched_left.len(), old.size());
        prop_assert_eq!(m.pairs.len() + m.unmatched_right.len(), new.size());
        let sum: f64 = m.pairs.iter().map(|p| p.score).sum();
        prop_assert!((sum - m.total_score).abs() < 1e-9);
    }

    #[test]
    fn pruning_a_token_never_raises_s0(seed in any::<u64>(), n in 1usize..25, pick in 0usize..100) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_tree(&mut rng, n);
        let b = perturb(&mut rng, &a, 3);
        let (old, new) = (DomTree::from_element(&a, None), DomTree::from_element(&b, None));
        let cfg = SftmConfig::default();
        let (index, s0) = initial_similarity(&old, &new, &cfg).unwrap();
        let token = index.entries()[pick % index.entries().len()].token.clone();
        let fewer = SftmConfig { ignored_tokens: vec![token], ..cfg.clone() };
        let (_, s0b) = initial_similarity(&old, &new, &fewer).unwrap();
        for (l, r, v) in s0b.iter() {
            prop_assert!(v <= s0.score(l, r) + 1e-12);
        }
    }
}
