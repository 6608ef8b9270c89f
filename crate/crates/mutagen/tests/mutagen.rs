use std::collections::HashSet;
use std::sync::Arc;

use erratum_core::dom::{parse_html, DomTree, ParseConfig};
use erratum_core::{match_trees, SftmConfig};
use erratum_mutagen::pages::{bundled_pages, synthetic_corpus, synthetic_page, Template};
use erratum_mutagen::{
    generate_dataset, mutate, read_corpus, sign_page, write_corpus, Category, CorpusEntry, DatasetOptions,
    MutagenError, MutantRecord, MutationKind,
};
use proptest::prelude::*;

const FIG_OLD: &str = r#"<div class="content-info__item">
    <div class="item__title">...</div>
    <div class="item__subtitle">
        ...
        <a href="/plugins">Plugins</a>
    </div>
</div>"#;

fn signed(tree: &DomTree) -> Arc<DomTree> {
    Arc::new(sign_page(tree).unwrap())
}

fn figure() -> Arc<DomTree> {
    signed(&parse_html(FIG_OLD.as_bytes(), &ParseConfig::fragment()).unwrap())
}

fn signatures(tree: &DomTree) -> Vec<String> {
    tree.nodes()
        .iter()
        .filter_map(|n| n.signature().map(str::to_owned))
        .collect()
}

/// Signature preservation and ground-truth soundness.
fn check_record(r: &MutantRecord) {
    let original: HashSet<String> = signatures(&r.original).into_iter().collect();
    let mutant = signatures(&r.mutant);
    assert_eq!(mutant.len(), r.mutant.size(), "every mutant node is signed");
    let unique: HashSet<&String> = mutant.iter().collect();
    assert_eq!(unique.len(), mutant.len(), "mutant signatures are unique");
    assert_eq!(r.ground_truth.len(), r.original.size());
    for (sig, node) in r.ground_truth.entries() {
        assert!(original.contains(sig));
        match node {
            Some(id) => assert_eq!(r.mutant.node(*id).signature(), Some(sig.as_str())),
            None => assert!(!unique.contains(sig)),
        }
    }
    for sig in &mutant {
        if !original.contains(sig) {
            assert!(sig.starts_with("new"), "fresh signature {sig}");
        }
    }
    for op in &r.ops {
        assert!(original.contains(&op.target), "op target {} is original", op.target);
        assert!(r.kinds.contains(&op.kind));
    }
}

#[test]
fn remove_on_the_subtitle_div_drops_it_and_its_link() {
    let tree = figure();
    let record = (0..200)
        .map(|seed| mutate(&tree, 0.25, &[MutationKind::StructureRemove], seed).unwrap())
        .find(|r| r.ops[0].target == "n2")
        .expect("some seed removes the subtitle div");
    assert_eq!(record.ops.len(), 1);
    assert_eq!(record.mutant.size(), 2);
    assert_eq!(record.ground_truth.get("n2"), Some(None));
    assert_eq!(record.ground_truth.get("n3"), Some(None));
    assert!(record.ground_truth.get("n0").unwrap().is_some());
    assert!(record.ground_truth.get("n1").unwrap().is_some());
    assert!(record.mutant.nodes().iter().all(|n| n.tag() != "a"));
    check_record(&record);
}

#[test]
fn ratio_zero_is_identity() {
    let tree = signed(&synthetic_page(Template::News, 300, 1));
    let r = mutate(&tree, 0.0, &MutationKind::ALL, 5).unwrap();
    assert!(r.ops.is_empty());
    assert_eq!(r.mutant.digest(), tree.digest());
    for (i, (sig, node)) in r.ground_truth.entries().iter().enumerate() {
        assert_eq!(*node, Some(tree.find_signature(sig).unwrap()));
        assert_eq!(node.unwrap().0, i);
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    let tree = figure();
    assert!(matches!(
        mutate(&tree, 1.5, &MutationKind::ALL, 0),
        Err(MutagenError::Ratio(_))
    ));
    assert!(matches!(mutate(&tree, 0.5, &[], 0), Err(MutagenError::NoKinds)));
    let unsigned = Arc::new(parse_html(FIG_OLD.as_bytes(), &ParseConfig::fragment()).unwrap());
    assert!(matches!(
        mutate(&unsigned, 0.5, &MutationKind::ALL, 0),
        Err(MutagenError::Unsigned(_))
    ));
    // A lone element has no structure-eligible node.
    let single = signed(&parse_html(b"<p class=\"x\"></p>", &ParseConfig::fragment()).unwrap());
    assert!(matches!(
        mutate(
            &single,
            1.0,
            &[MutationKind::StructureSwap, MutationKind::ContentRemove],
            0
        ),
        Err(MutagenError::NoEligible)
    ));
    // Kinds without eligible nodes are re-drawn.
    let r = mutate(
        &single,
        1.0,
        &[MutationKind::StructureSwap, MutationKind::AttributeRemove],
        0,
    )
    .unwrap();
    assert_eq!(r.ops[0].kind, MutationKind::AttributeRemove);
}

#[test]
fn every_kind_produces_sound_records() {
    let pages: Vec<Arc<DomTree>> = Template::ALL
        .iter()
        .map(|t| signed(&synthetic_page(*t, 250, 11)))
        .chain(bundled_pages().unwrap().iter().map(|(_, p)| signed(p)))
        .collect();
    for kind in MutationKind::ALL {
        for (i, page) in pages.iter().enumerate() {
            let r = mutate(page, 0.05, &[kind], i as u64).unwrap();
            assert_eq!(r.ops.len(), (0.05 * page.size() as f64).round() as usize);
            assert!(r.ops.iter().all(|o| o.kind == kind));
            check_record(&r);
        }
    }
}

#[test]
fn structure_operators_follow_their_semantics() {
    let tree = signed(&synthetic_page(Template::Shop, 300, 4));
    let one = |kind, seed| mutate(&tree, 1.0 / tree.size() as f64, &[kind], seed).unwrap();

    let r = one(MutationKind::StructureDuplicate, 1);
    let copy = r.ops[0].payload.created.clone().unwrap();
    let target = tree.find_signature(&r.ops[0].target).unwrap();
    assert_eq!(r.mutant.size(), tree.size() + tree.node(target).subtree_size());
    let copy_id = r.mutant.find_signature(&copy).unwrap();
    let orig_id = r.ground_truth.get(&r.ops[0].target).unwrap().unwrap();
    assert_eq!(r.mutant.node(copy_id).parent(), r.mutant.node(orig_id).parent());

    let r = one(MutationKind::StructureWrap, 2);
    let wrapper = r
        .mutant
        .find_signature(r.ops[0].payload.created.as_deref().unwrap())
        .unwrap();
    let moved = r.ground_truth.get(&r.ops[0].target).unwrap().unwrap();
    assert_eq!(r.mutant.node(moved).parent(), Some(wrapper));
    assert_eq!(r.mutant.size(), tree.size() + 1);

    let r = one(MutationKind::StructureUnwrap, 3);
    assert_eq!(r.ground_truth.get(&r.ops[0].target), Some(None));
    assert_eq!(r.mutant.size(), tree.size() - 1);

    let r = one(MutationKind::StructureSwap, 4);
    let a = r.ground_truth.get(&r.ops[0].target).unwrap().unwrap();
    let b = r
        .ground_truth
        .get(r.ops[0].payload.sibling.as_deref().unwrap())
        .unwrap()
        .unwrap();
    assert_eq!(r.mutant.node(a).parent(), r.mutant.node(b).parent());
    assert_eq!(r.mutant.size(), tree.size());

    for n in tree.nodes() {
        if matches!(n.tag(), "html" | "head" | "body") {
            let sig = n.signature().unwrap();
            for seed in 0..30 {
                let r = mutate(&tree, 0.1, &Category::Structure.kinds(), seed).unwrap();
                assert!(r.ops.iter().all(|o| o.target != sig));
                assert!(r.ground_truth.get(sig).unwrap().is_some());
            }
        }
    }
}

#[test]
fn content_and_attribute_operators_keep_the_shape() {
    let tree = signed(&synthetic_page(Template::Blog, 400, 8));
    for kind in Category::Content.kinds().into_iter().chain(Category::Attribute.kinds()) {
        let r = mutate(&tree, 0.1, &[kind], 21).unwrap();
        assert_eq!(r.mutant.size(), tree.size(), "{kind}");
        assert_ne!(r.mutant.digest(), tree.digest(), "{kind}");
        for (i, (_, node)) in r.ground_truth.entries().iter().enumerate() {
            assert_eq!(node.unwrap().0, i);
        }
    }
}

#[test]
fn matching_content_only_mutants_recovers_every_node() {
    let config = SftmConfig::default();
    for (i, t) in [Template::News, Template::Shop, Template::Docs].into_iter().enumerate() {
        let tree = signed(&synthetic_page(t, 400, 30 + i as u64));
        let r = mutate(&tree, 0.2, &Category::Content.kinds(), i as u64).unwrap();
        let m = match_trees(&tree, &r.mutant, &config).unwrap();
        for (sig, node) in r.ground_truth.entries() {
            let left = tree.find_signature(sig).unwrap();
            assert_eq!(m.right_of(left).map(|p| p.right), *node, "{t}: {sig}");
        }
    }
}

#[test]
fn datasets_are_deterministic_with_distinct_seeds() {
    let page = synthetic_page(Template::Forum, 300, 2);
    let options = DatasetOptions::default();
    let a = generate_dataset(std::slice::from_ref(&page), &options, 99).unwrap();
    let b = generate_dataset(std::slice::from_ref(&page), &options, 99).unwrap();
    assert_eq!(a.len(), 10);
    let seeds: HashSet<u64> = a.iter().map(|r| r.seed).collect();
    assert_eq!(seeds.len(), 10);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.mutant.digest(), y.mutant.digest());
        assert_eq!(x.ops, y.ops);
        assert!(x.ratio > 0.0 && x.ratio <= 0.25 + 1.0 / x.original.size() as f64);
        check_record(x);
    }
    let c = generate_dataset(std::slice::from_ref(&page), &options, 100).unwrap();
    assert_ne!(a[0].mutant.digest(), c[0].mutant.digest());
}

#[test]
fn constrained_mode_uses_a_single_kind() {
    let pages: Vec<DomTree> = synthetic_corpus(4, 150, 400, 5).into_iter().map(|(_, p)| p).collect();
    let options = DatasetOptions {
        constrained: true,
        ..DatasetOptions::default()
    };
    for r in generate_dataset(&pages, &options, 3).unwrap() {
        assert_eq!(r.kinds.len(), 1);
        assert!(r.ops.iter().all(|o| o.kind == r.kinds[0]));
        check_record(&r);
    }
}

#[test]
fn corpus_round_trip_keeps_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let pages = synthetic_corpus(2, 200, 500, 8);
    let trees: Vec<DomTree> = pages.iter().map(|(_, p)| p.clone()).collect();
    let options = DatasetOptions {
        mutants_per_page: 3,
        ..DatasetOptions::default()
    };
    let records = generate_dataset(&trees, &options, 4).unwrap();
    let entries: Vec<CorpusEntry> = pages
        .iter()
        .zip(records.chunks(3))
        .map(|((name, _), rs)| CorpusEntry {
            site: name.clone(),
            original: Arc::clone(&rs[0].original),
            mutants: rs.to_vec(),
        })
        .collect();
    write_corpus(dir.path(), &entries).unwrap();
    let back = read_corpus(dir.path()).unwrap();
    assert_eq!(back.len(), 2);
    for (e, b) in entries.iter().zip(&back) {
        assert_eq!(e.site, b.site);
        assert_eq!(e.original.digest(), b.original.digest());
        assert_eq!(signatures(&e.original), signatures(&b.original));
        for (m, n) in e.mutants.iter().zip(&b.mutants) {
            assert_eq!(m.mutant.digest(), n.mutant.digest());
            assert_eq!(m.ground_truth, n.ground_truth);
            assert_eq!(m.ops, n.ops);
            check_record(n);
        }
    }
    let record: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join(&entries[0].site).join("mutants/0.record.json")).unwrap(),
    )
    .unwrap();
    for key in ["ops", "groundTruth", "ratio", "seed"] {
        assert!(record.get(key).is_some(), "{key}");
    }
}

#[test]
fn scale_of_a_full_dataset() {
    // 650 source pages with 10 mutants each give 6,500 candidate pairs,
    // enough to keep 3,291 after discarding failures.
    let options = DatasetOptions::default();
    assert!(650 * options.mutants_per_page >= 3291);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_mutants_are_sound(seed in any::<u64>(), ratio in 0.0f64..0.3, t in 0usize..6, size in 120usize..500) {
        let tree = signed(&synthetic_page(Template::ALL[t], size, seed));
        let r = mutate(&tree, ratio, &MutationKind::ALL, seed).unwrap();
        prop_assert_eq!(r.ops.len(), (ratio * tree.size() as f64).round() as usize);
        prop_assert!((r.ratio - r.ops.len() as f64 / tree.size() as f64).abs() < 1e-12);
        check_record(&r);
    }
}
