use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use erratum_core::dom::{absolute_xpath, signature_reads, NodeId, XPathLocator};
use erratum_core::repair::LocatorResult;
use erratum_core::water::water_repair;
use erratum_core::{RepairEngine, RepairRequest, SftmConfig, WaterConfig};
use erratum_mutagen::{mutant_seed, CorpusEntry, MutantRecord, MutationKind};
use rayon::prelude::*;
use serde::Serialize;

use crate::{
    classify, select_targets, Algorithm, BenchError, BenchReport, ClickableConfig, OutcomeLabel, DEFAULT_TARGETS,
};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub algorithms: Vec<Algorithm>,
    /// Targets sampled per version pair.
    pub targets_per_page: usize,
    /// Seeds target selection and the matcher, per pair.
    pub seed: u64,
    /// Worker threads; 0 uses every logical processor.
    pub jobs: usize,
    pub clickable: ClickableConfig,
    pub sftm: SftmConfig,
    pub water: WaterConfig,
    /// Record per-element wall-clock time. Pairs then run one at a time.
    pub timed: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            algorithms: Algorithm::ALL.to_vec(),
            targets_per_page: DEFAULT_TARGETS,
            seed: 0,
            jobs: 0,
            clickable: ClickableConfig::default(),
            sftm: SftmConfig::default(),
            water: WaterConfig::default(),
            timed: false,
        }
    }
}

/// One (algorithm, element) relocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Trial {
    pub algorithm: Algorithm,
    pub site: String,
    /// Index of the mutant within its site.
    pub mutant: usize,
    /// Signature of the target in the original page.
    pub element: String,
    pub label: OutcomeLabel,
    pub score: Option<f64>,
    pub time_ms: Option<f64>,
    /// Node count of the original page.
    pub dom_size: usize,
    pub ratio: f64,
    /// Kinds of the operations applied to the mutant.
    pub kinds: Vec<MutationKind>,
}

/// A failed relocation, counted as no-match.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TrialError {
    pub algorithm: Algorithm,
    pub site: String,
    pub mutant: usize,
    pub element: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SkippedPair {
    pub site: String,
    pub mutant: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRun {
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    /// Pairs in dataset order, targets in document order, then algorithms.
    pub trials: Vec<Trial>,
    pub errors: Vec<TrialError>,
    pub skipped: Vec<SkippedPair>,
    /// Ground-truth signature reads made by each algorithm; always zero for
    /// a sound harness.
    pub signature_reads: Vec<(Algorithm, u64)>,
}

impl BenchRun {
    pub fn report(&self) -> BenchReport {
        crate::build_report(self)
    }
}

#[derive(Default)]
struct PairResult {
    trials: Vec<Trial>,
    errors: Vec<TrialError>,
    skipped: Option<SkippedPair>,
    reads: Vec<u64>,
}

type Prediction = Result<Option<(NodeId, f64)>, String>;

/// Runs `f`, turning its error or panic into a message.
fn guarded<T, E: ToString>(f: impl FnOnce() -> Result<T, E>) -> Result<T, String> {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r.map_err(|e| e.to_string()),
        Err(payload) => {
            let text = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_owned());
            Err(format!("panic: {text}"))
        }
    }
}

/// First element of a single-locator result.
fn prediction(result: &LocatorResult) -> Prediction {
    match result {
        Ok(outcome) => match outcome.elements.as_slice() {
            [e] => Ok(e.new_node.zip(e.score)),
            other => Err(format!("locator selected {} elements", other.len())),
        },
        Err(e) => Err(e.to_string()),
    }
}

fn run_erratum(rec: &MutantRecord, locators: &[XPathLocator], sftm: &SftmConfig) -> (Vec<Prediction>, f64) {
    let start = Instant::now();
    let outcome = guarded(|| {
        let engine = RepairEngine::new(sftm.clone())?;
        engine.repair(&RepairRequest {
            old_tree: &rec.original,
            new_tree: &rec.mutant,
            locators: locators.to_vec(),
        })
    });
    let elapsed = start.elapsed().as_secs_f64() * 1e3 / locators.len() as f64;
    let predictions = match outcome {
        Ok(results) => results.iter().map(prediction).collect(),
        Err(e) => vec![Err(e); locators.len()],
    };
    (predictions, elapsed)
}

fn run_water(rec: &MutantRecord, locator: &XPathLocator, water: &WaterConfig) -> (Prediction, f64) {
    let start = Instant::now();
    let outcome = guarded(|| water_repair(&rec.original, &rec.mutant, std::slice::from_ref(locator), water));
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let p = outcome.and_then(|results| prediction(&results[0]));
    (p, elapsed)
}

fn applied_kinds(rec: &MutantRecord) -> Vec<MutationKind> {
    let mut kinds: Vec<MutationKind> = rec.ops.iter().map(|o| o.kind).collect();
    kinds.sort();
    kinds.dedup();
    kinds
}

fn run_pair(site: &str, page: usize, mutant: usize, rec: &MutantRecord, config: &BenchConfig) -> PairResult {
    let seed = mutant_seed(config.seed, page, mutant);
    let mut out = PairResult {
        reads: vec![0; config.algorithms.len()],
        ..PairResult::default()
    };
    let skip = |reason: String| SkippedPair {
        site: site.to_owned(),
        mutant,
        reason,
    };
    let targets = select_targets(&rec.original, config.targets_per_page, seed, &config.clickable);
    if targets.is_empty() {
        log::info!("{site}/{mutant}: no clickable element, pair skipped");
        out.skipped = Some(skip("no clickable element".to_owned()));
        return out;
    }
    // Ground truth is looked up here, outside the algorithms.
    let mut cases = Vec::with_capacity(targets.len());
    for t in targets {
        let sig = rec.original.node(t).signature().map(str::to_owned);
        let truth = sig.as_deref().and_then(|s| rec.ground_truth.get(s));
        let locator = absolute_xpath(&rec.original, t);
        match (sig, truth, locator) {
            (Some(sig), Some(truth), Ok(locator)) => cases.push((sig, truth, locator)),
            (sig, _, _) => {
                let what = sig.unwrap_or_else(|| t.to_string());
                out.skipped = Some(skip(format!("no ground truth for {what}")));
                return out;
            }
        }
    }
    let locators: Vec<XPathLocator> = cases.iter().map(|c| c.2.clone()).collect();
    let kinds = applied_kinds(rec);
    for (a, &algorithm) in config.algorithms.iter().enumerate() {
        let before = signature_reads();
        let results: Vec<(Prediction, f64)> = match algorithm {
            Algorithm::Erratum => {
                let (p, ms) = run_erratum(rec, &locators, &config.sftm.clone().with_seed(seed));
                p.into_iter().map(|p| (p, ms)).collect()
            }
            Algorithm::Water => locators.iter().map(|l| run_water(rec, l, &config.water)).collect(),
        };
        out.reads[a] += signature_reads() - before;
        for ((sig, truth, _), (p, ms)) in cases.iter().zip(results) {
            let (label, score) = match p {
                Ok(found) => (classify(found.map(|f| f.0), *truth), found.map(|f| f.1)),
                Err(message) => {
                    out.errors.push(TrialError {
                        algorithm,
                        site: site.to_owned(),
                        mutant,
                        element: sig.clone(),
                        message,
                    });
                    (OutcomeLabel::NoMatch, None)
                }
            };
            out.trials.push(Trial {
                algorithm,
                site: site.to_owned(),
                mutant,
                element: sig.clone(),
                label,
                score,
                time_ms: config.timed.then_some(ms),
                dom_size: rec.original.size(),
                ratio: rec.ratio,
                kinds: kinds.clone(),
            });
        }
    }
    out
}

/// Relocates sampled targets of every mutant with every algorithm and
/// labels the results against the ground truth. Algorithm failures become
/// no-match trials with an error note; they never abort the run.
pub fn run_benchmark(entries: &[CorpusEntry], config: &BenchConfig) -> Result<BenchRun, BenchError> {
    if config.algorithms.is_empty() {
        return Err(BenchError::Config("no algorithm selected".into()));
    }
    config.sftm.validate().map_err(|e| BenchError::Config(e.to_string()))?;
    config.water.validate()?;
    let work: Vec<(usize, usize)> = entries
        .iter()
        .enumerate()
        .flat_map(|(p, e)| (0..e.mutants.len()).map(move |m| (p, m)))
        .collect();
    if work.is_empty() {
        return Err(BenchError::EmptyDataset);
    }
    let one = |&(p, m): &(usize, usize)| run_pair(&entries[p].site, p, m, &entries[p].mutants[m], config);
    let results: Vec<PairResult> = if config.timed || config.jobs == 1 {
        work.iter().map(one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| BenchError::Config(e.to_string()))?;
        pool.install(|| work.par_iter().map(one).collect())
    };

    let mut run = BenchRun {
        seed: config.seed,
        algorithms: config.algorithms.clone(),
        trials: Vec::new(),
        errors: Vec::new(),
        skipped: Vec::new(),
        signature_reads: config.algorithms.iter().map(|a| (*a, 0)).collect(),
    };
    for r in results {
        run.trials.extend(r.trials);
        run.errors.extend(r.errors);
        run.skipped.extend(r.skipped);
        for (total, n) in run.signature_reads.iter_mut().zip(r.reads) {
            total.1 += n;
        }
    }
    Ok(run)
}
