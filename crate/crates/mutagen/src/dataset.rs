use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use erratum_core::dom::{parse_html, to_html, DomTree, Element, ParseConfig, DEFAULT_SIGNATURE_ATTR};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{mutate, normalize, MutagenError, MutantRecord, MutationKind, RecordFile};

/// Returns a normalized copy of `tree` whose nodes are signed `n0, n1, ...`
/// in document order. Existing signatures are replaced.
pub fn sign_page(tree: &DomTree) -> Result<DomTree, MutagenError> {
    fn walk(el: &mut Element, next: &mut usize) {
        el.signature = Some(format!("n{next}"));
        *next += 1;
        for c in &mut el.children {
            walk(c, next);
        }
    }
    let sig_attr = tree.signature_attr().unwrap_or(DEFAULT_SIGNATURE_ATTR);
    let normal = normalize(&DomTree::from_element(&tree.to_element(tree.root()), Some(sig_attr)))?;
    let mut root = normal.to_element(normal.root());
    walk(&mut root, &mut 0);
    Ok(DomTree::from_element(&root, Some(sig_attr)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetOptions {
    pub mutants_per_page: usize,
    /// Mutation ratios are drawn uniformly from `(min_ratio, max_ratio]`.
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub kinds: Vec<MutationKind>,
    /// Each mutant uses a single randomly chosen kind, applied as many
    /// times as its ratio requires.
    pub constrained: bool,
}

impl Default for DatasetOptions {
    fn default() -> Self {
        DatasetOptions {
            mutants_per_page: 10,
            min_ratio: 0.0,
            max_ratio: 0.25,
            kinds: MutationKind::ALL.to_vec(),
            constrained: false,
        }
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed of mutant `mutant` of page `page`.
pub fn mutant_seed(seed: u64, page: usize, mutant: usize) -> u64 {
    splitmix(splitmix(seed ^ splitmix(page as u64)) ^ mutant as u64)
}

fn check_options(options: &DatasetOptions) -> Result<(), MutagenError> {
    if options.kinds.is_empty() {
        return Err(MutagenError::NoKinds);
    }
    let (lo, hi) = (options.min_ratio, options.max_ratio);
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo >= hi {
        return Err(MutagenError::RatioRange(lo, hi));
    }
    Ok(())
}

/// Mutants of the signed page number `page`. Mutants whose kinds run out of
/// eligible nodes before the requested count is reached are skipped.
fn page_mutants(
    signed: &Arc<DomTree>,
    page: usize,
    options: &DatasetOptions,
    seed: u64,
) -> Result<Vec<MutantRecord>, MutagenError> {
    let (lo, hi) = (options.min_ratio, options.max_ratio);
    let mut out = Vec::with_capacity(options.mutants_per_page);
    for m in 0..options.mutants_per_page {
        let s = mutant_seed(seed, page, m);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let ratio = hi - (hi - lo) * rng.gen::<f64>();
        let kinds = if options.constrained {
            vec![options.kinds[rng.gen_range(0..options.kinds.len())]]
        } else {
            options.kinds.clone()
        };
        match mutate(signed, ratio, &kinds, s) {
            Ok(r) => out.push(r),
            // A single kind can run out of targets; such mutants are dropped.
            Err(MutagenError::NoEligible) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Signs every page and derives `mutants_per_page` mutants from each, in
/// page order. Each mutant has its own seed, so pages can be processed
/// independently.
pub fn generate_dataset(
    pages: &[DomTree],
    options: &DatasetOptions,
    seed: u64,
) -> Result<Vec<MutantRecord>, MutagenError> {
    if pages.is_empty() {
        return Err(MutagenError::NoPages);
    }
    check_options(options)?;
    let mut out = Vec::with_capacity(pages.len() * options.mutants_per_page);
    for (p, page) in pages.iter().enumerate() {
        out.extend(page_mutants(&Arc::new(sign_page(page)?), p, options, seed)?);
    }
    Ok(out)
}

/// Same mutants as [`generate_dataset`], grouped by named page.
pub fn generate_corpus(
    pages: &[(String, DomTree)],
    options: &DatasetOptions,
    seed: u64,
) -> Result<Vec<CorpusEntry>, MutagenError> {
    if pages.is_empty() {
        return Err(MutagenError::NoPages);
    }
    check_options(options)?;
    pages
        .iter()
        .enumerate()
        .map(|(p, (site, page))| {
            let original = Arc::new(sign_page(page)?);
            let mutants = page_mutants(&original, p, options, seed)?;
            Ok(CorpusEntry {
                site: site.clone(),
                original,
                mutants,
            })
        })
        .collect()
}

/// A signed page and its mutants, as stored under `corpus/<site>/`.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub site: String,
    pub original: Arc<DomTree>,
    pub mutants: Vec<MutantRecord>,
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> MutagenError + '_ {
    move |source| MutagenError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `<dir>/<site>/original.html` and, per mutant,
/// `<dir>/<site>/mutants/<i>.html` with `<i>.record.json`.
pub fn write_corpus(dir: &Path, entries: &[CorpusEntry]) -> Result<(), MutagenError> {
    for e in entries {
        let site = dir.join(&e.site);
        let mutants = site.join("mutants");
        fs::create_dir_all(&mutants).map_err(io(&mutants))?;
        let original = site.join("original.html");
        fs::write(&original, to_html(&e.original)).map_err(io(&original))?;
        for (i, m) in e.mutants.iter().enumerate() {
            let html = mutants.join(format!("{i}.html"));
            fs::write(&html, to_html(&m.mutant)).map_err(io(&html))?;
            let record = mutants.join(format!("{i}.record.json"));
            let json = serde_json::to_string_pretty(&m.record_file()).expect("records serialize");
            fs::write(&record, json + "\n").map_err(io(&record))?;
        }
    }
    Ok(())
}

fn parse_file(path: &Path) -> Result<DomTree, MutagenError> {
    let bytes = fs::read(path).map_err(io(path))?;
    let document = String::from_utf8_lossy(&bytes[..bytes.len().min(64)])
        .trim_start()
        .to_ascii_lowercase()
        .starts_with("<!doctype");
    let config = ParseConfig {
        fragment: !document,
        ..ParseConfig::default()
    };
    Ok(parse_html(&bytes, &config)?)
}

/// Reads a page written by [`write_corpus`]; pages without a doctype are
/// read as fragments.
pub fn load_original(path: &Path) -> Result<DomTree, MutagenError> {
    parse_file(path)
}

fn sorted_dirs(dir: &Path) -> Result<Vec<PathBuf>, MutagenError> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(io(dir))? {
        let path = entry.map_err(io(dir))?.path();
        if path.is_dir() {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Reads every `<site>` directory of a corpus, sorted by name. Sites
/// without mutants are returned with an empty mutant list.
pub fn read_corpus(dir: &Path) -> Result<Vec<CorpusEntry>, MutagenError> {
    let mut entries = Vec::new();
    for site in sorted_dirs(dir)? {
        let original_path = site.join("original.html");
        if !original_path.is_file() {
            continue;
        }
        let original = Arc::new(parse_file(&original_path)?);
        let mut indices: Vec<usize> = Vec::new();
        let mutants_dir = site.join("mutants");
        if mutants_dir.is_dir() {
            for entry in fs::read_dir(&mutants_dir).map_err(io(&mutants_dir))? {
                let name = entry.map_err(io(&mutants_dir))?.file_name();
                let name = name.to_string_lossy();
                if let Some(i) = name.strip_suffix(".html").and_then(|s| s.parse().ok()) {
                    indices.push(i);
                }
            }
        }
        indices.sort_unstable();
        let mut mutants = Vec::with_capacity(indices.len());
        for i in indices {
            let mutant = parse_file(&mutants_dir.join(format!("{i}.html")))?;
            let record_path = mutants_dir.join(format!("{i}.record.json"));
            let text = fs::read_to_string(&record_path).map_err(io(&record_path))?;
            let record: RecordFile = serde_json::from_str(&text).map_err(|source| MutagenError::Json {
                path: record_path.display().to_string(),
                source,
            })?;
            mutants.push(MutantRecord {
                original: Arc::clone(&original),
                mutant,
                ops: record.ops,
                ground_truth: record.ground_truth,
                ratio: record.ratio,
                seed: record.seed,
                kinds: record.kinds,
            });
        }
        entries.push(CorpusEntry {
            site: site
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
            original,
            mutants,
        });
    }
    Ok(entries)
}
