use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use erratum_mutagen::{Category, MutationKind};
use serde::Serialize;

use crate::{Algorithm, BenchError, BenchRun, OutcomeLabel, SkippedPair, TimingReport, Trial, TrialError};

/// Mutation-ratio bins as `(label, lower, upper)`; a ratio falls in the
/// first bin whose upper bound it does not exceed.
pub const RATIO_BINS: [(&str, f64, f64); 4] = [
    ("0-5%", 0.0, 0.05),
    ("5-10%", 0.05, 0.10),
    ("10-20%", 0.10, 0.20),
    (">20%", 0.20, 1.0),
];

const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LabelCounts {
    pub correct: usize,
    pub mismatch: usize,
    pub no_match: usize,
}

impl LabelCounts {
    pub fn add(&mut self, label: OutcomeLabel) {
        match label {
            OutcomeLabel::Correct => self.correct += 1,
            OutcomeLabel::Mismatch => self.mismatch += 1,
            OutcomeLabel::NoMatch => self.no_match += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.correct + self.mismatch + self.no_match
    }

    pub fn get(&self, label: OutcomeLabel) -> usize {
        match label {
            OutcomeLabel::Correct => self.correct,
            OutcomeLabel::Mismatch => self.mismatch,
            OutcomeLabel::NoMatch => self.no_match,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LabelRates {
    pub correct: f64,
    pub mismatch: f64,
    pub no_match: f64,
}

/// Normal-approximation 95% confidence interval, clamped to [0, 1].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

impl Interval {
    fn for_rate(p: f64, n: usize) -> Interval {
        if n == 0 {
            return Interval::default();
        }
        let half = Z95 * (p * (1.0 - p) / n as f64).sqrt();
        Interval {
            low: (p - half).max(0.0),
            high: (p + half).min(1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LabelIntervals {
    pub correct: Interval,
    pub mismatch: Interval,
    pub no_match: Interval,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LabelStats {
    pub trials: usize,
    pub counts: LabelCounts,
    pub ratios: LabelRates,
    pub ci95: LabelIntervals,
    /// Mismatch plus no-match rate.
    pub error_rate: f64,
}

impl LabelStats {
    fn of<'a>(trials: impl Iterator<Item = &'a Trial>) -> LabelStats {
        let mut counts = LabelCounts::default();
        for t in trials {
            counts.add(t.label);
        }
        let n = counts.total();
        let rate = |c: usize| if n == 0 { 0.0 } else { c as f64 / n as f64 };
        let ratios = LabelRates {
            correct: rate(counts.correct),
            mismatch: rate(counts.mismatch),
            no_match: rate(counts.no_match),
        };
        LabelStats {
            trials: n,
            counts,
            ratios,
            ci95: LabelIntervals {
                correct: Interval::for_rate(ratios.correct, n),
                mismatch: Interval::for_rate(ratios.mismatch, n),
                no_match: Interval::for_rate(ratios.no_match, n),
            },
            error_rate: if n == 0 { 0.0 } else { 1.0 - ratios.correct },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    #[serde(flatten)]
    pub stats: LabelStats,
    pub signature_reads: u64,
}

/// Outcomes of one algorithm within one bin of a factor.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BinSummary {
    pub bin: String,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub algorithm: Algorithm,
    #[serde(flatten)]
    pub stats: LabelStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchReport {
    pub seed: u64,
    /// Version pairs with at least one trial.
    pub pairs: usize,
    pub trials: usize,
    pub algorithms: Vec<AlgorithmSummary>,
    /// Quintiles of the original page size over evaluated pairs.
    pub by_size: Vec<BinSummary>,
    pub by_ratio: Vec<BinSummary>,
    /// A trial counts towards every kind applied to its mutant.
    pub by_kind: Vec<BinSummary>,
    pub by_category: Vec<BinSummary>,
    pub skipped: Vec<SkippedPair>,
    pub errors: Vec<TrialError>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<TimingReport>,
}

impl BenchReport {
    pub fn summary(&self, algorithm: Algorithm) -> Option<&AlgorithmSummary> {
        self.algorithms.iter().find(|s| s.algorithm == algorithm)
    }

    /// Bins of a breakdown for one algorithm, in bin order.
    pub fn bins<'a>(rows: &'a [BinSummary], algorithm: Algorithm) -> impl Iterator<Item = &'a BinSummary> + 'a {
        rows.iter().filter(move |r| r.algorithm == algorithm)
    }
}

pub fn ratio_bin(ratio: f64) -> usize {
    RATIO_BINS
        .iter()
        .position(|(_, _, upper)| ratio <= *upper)
        .unwrap_or(RATIO_BINS.len() - 1)
}

/// Upper bounds of the size quintiles, by nearest rank.
fn quintile_cuts(sizes: &[usize]) -> Vec<usize> {
    let mut sorted = sizes.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    (1..5).map(|j| sorted[(j * n).div_ceil(5).max(1) - 1]).collect()
}

fn binned<F>(run: &BenchRun, bins: &[(String, Option<f64>, Option<f64>)], member: F) -> Vec<BinSummary>
where
    F: Fn(&Trial, usize) -> bool,
{
    let mut out = Vec::new();
    for (b, (name, lower, upper)) in bins.iter().enumerate() {
        for &algorithm in &run.algorithms {
            let stats = LabelStats::of(run.trials.iter().filter(|t| t.algorithm == algorithm && member(t, b)));
            if stats.trials > 0 {
                out.push(BinSummary {
                    bin: name.clone(),
                    lower: *lower,
                    upper: *upper,
                    algorithm,
                    stats,
                });
            }
        }
    }
    out
}

pub fn build_report(run: &BenchRun) -> BenchReport {
    let algorithms = run
        .algorithms
        .iter()
        .map(|&algorithm| AlgorithmSummary {
            algorithm,
            stats: LabelStats::of(run.trials.iter().filter(|t| t.algorithm == algorithm)),
            signature_reads: run
                .signature_reads
                .iter()
                .find(|(a, _)| *a == algorithm)
                .map_or(0, |(_, n)| *n),
        })
        .collect();

    let pairs: BTreeSet<(&str, usize, usize)> = run
        .trials
        .iter()
        .map(|t| (t.site.as_str(), t.mutant, t.dom_size))
        .collect();
    let sizes: Vec<usize> = pairs.iter().map(|p| p.2).collect();
    let by_size = if sizes.is_empty() {
        Vec::new()
    } else {
        let cuts = quintile_cuts(&sizes);
        let bin_of = |s: usize| cuts.iter().position(|c| s <= *c).unwrap_or(cuts.len());
        let bins: Vec<(String, Option<f64>, Option<f64>)> = (0..5)
            .map(|b| {
                let members = sizes.iter().filter(|s| bin_of(**s) == b);
                let lo = members.clone().min().map(|s| *s as f64);
                let hi = members.max().map(|s| *s as f64);
                (format!("q{}", b + 1), lo, hi)
            })
            .collect();
        binned(run, &bins, |t, b| bin_of(t.dom_size) == b)
    };

    let ratio_bins: Vec<(String, Option<f64>, Option<f64>)> = RATIO_BINS
        .iter()
        .map(|(name, lo, hi)| (name.to_string(), Some(*lo), Some(*hi)))
        .collect();
    let by_ratio = binned(run, &ratio_bins, |t, b| ratio_bin(t.ratio) == b);

    let kind_bins: Vec<(String, Option<f64>, Option<f64>)> = MutationKind::ALL
        .iter()
        .map(|k| (k.name().to_owned(), None, None))
        .collect();
    let by_kind = binned(run, &kind_bins, |t, b| t.kinds.contains(&MutationKind::ALL[b]));

    let category_bins: Vec<(String, Option<f64>, Option<f64>)> = Category::ALL
        .iter()
        .map(|c| (c.name().to_owned(), None, None))
        .collect();
    let by_category = binned(run, &category_bins, |t, b| {
        t.kinds.iter().any(|k| k.category() == Category::ALL[b])
    });

    BenchReport {
        seed: run.seed,
        pairs: pairs.len(),
        trials: run.trials.len(),
        algorithms,
        by_size,
        by_ratio,
        by_kind,
        by_category,
        skipped: run.skipped.clone(),
        errors: run.errors.clone(),
        timing: None,
    }
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_csv(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), BenchError> {
    let err = |source| BenchError::Csv {
        path: path.display().to_string(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    w.flush().map_err(|e| err(e.into()))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

const BIN_HEADER: [&str; 10] = [
    "bin",
    "lower",
    "upper",
    "algorithm",
    "trials",
    "correct",
    "mismatch",
    "noMatch",
    "errorRate",
    "correctRate",
];

fn bin_rows(rows: &[BinSummary]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.bin.clone(),
                opt(r.lower),
                opt(r.upper),
                r.algorithm.to_string(),
                r.stats.trials.to_string(),
                r.stats.counts.correct.to_string(),
                r.stats.counts.mismatch.to_string(),
                r.stats.counts.no_match.to_string(),
                r.stats.error_rate.to_string(),
                r.stats.ratios.correct.to_string(),
            ]
        })
        .collect()
}

/// Columns of `metrics.csv`.
pub const METRICS_HEADER: [&str; 10] = [
    "algorithm",
    "site",
    "mutant",
    "element",
    "label",
    "score",
    "timeMs",
    "domSize",
    "ratio",
    "kinds",
];

/// Writes `metrics.csv`, `report.json` and the per-figure series
/// (`errors_by_*.csv`, and `time_by_*.csv` when the report has timings).
pub fn write_artifacts(dir: &Path, run: &BenchRun, report: &BenchReport) -> Result<(), BenchError> {
    fs::create_dir_all(dir).map_err(io(dir))?;
    let rows = run
        .trials
        .iter()
        .map(|t| {
            vec![
                t.algorithm.to_string(),
                t.site.clone(),
                t.mutant.to_string(),
                t.element.clone(),
                t.label.to_string(),
                opt(t.score),
                opt(t.time_ms),
                t.dom_size.to_string(),
                t.ratio.to_string(),
                t.kinds.iter().map(|k| k.name()).collect::<Vec<_>>().join(";"),
            ]
        })
        .collect();
    write_csv(&dir.join("metrics.csv"), &METRICS_HEADER, rows)?;

    let path = dir.join("report.json");
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    fs::write(&path, json + "\n").map_err(io(&path))?;

    write_csv(&dir.join("errors_by_size.csv"), &BIN_HEADER, bin_rows(&report.by_size))?;
    write_csv(
        &dir.join("errors_by_ratio.csv"),
        &BIN_HEADER,
        bin_rows(&report.by_ratio),
    )?;
    write_csv(&dir.join("errors_by_kind.csv"), &BIN_HEADER, bin_rows(&report.by_kind))?;
    write_csv(
        &dir.join("errors_by_category.csv"),
        &BIN_HEADER,
        bin_rows(&report.by_category),
    )?;

    if let Some(timing) = &report.timing {
        let rows = timing
            .points
            .iter()
            .map(|p| vec![p.algorithm.to_string(), p.locators.to_string(), p.median_ms.to_string()])
            .collect();
        write_csv(
            &dir.join("time_by_locators.csv"),
            &["algorithm", "locators", "medianMs"],
            rows,
        )?;
        let rows = timing
            .by_size
            .iter()
            .map(|p| {
                vec![
                    p.algorithm.to_string(),
                    p.dom_size.to_string(),
                    p.locators.to_string(),
                    p.median_ms.to_string(),
                ]
            })
            .collect();
        write_csv(
            &dir.join("time_by_size.csv"),
            &["algorithm", "domSize", "locators", "medianMs"],
            rows,
        )?;
    }
    Ok(())
}
