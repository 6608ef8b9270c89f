use std::hint::black_box;
use std::time::Instant;

use erratum_core::dom::{absolute_xpath, DomTree, XPathLocator};
use erratum_core::water::water_repair;
use erratum_core::{RepairEngine, RepairRequest, SftmConfig, WaterConfig};
use serde::Serialize;

use crate::{select_targets, Algorithm, BenchError, ClickableConfig, DEFAULT_TARGETS};

#[derive(Debug, Clone, PartialEq)]
pub struct TimingConfig {
    /// Locator counts, ascending.
    pub counts: Vec<usize>,
    pub repeats: usize,
    /// Seeds target selection.
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub sftm: SftmConfig,
    pub water: WaterConfig,
    pub clickable: ClickableConfig,
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig {
            counts: (1..=DEFAULT_TARGETS).collect(),
            repeats: 5,
            seed: 0,
            algorithms: Algorithm::ALL.to_vec(),
            sftm: SftmConfig::default(),
            water: WaterConfig::default(),
            clickable: ClickableConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TimingPoint {
    pub algorithm: Algorithm,
    pub locators: usize,
    pub median_ms: f64,
    pub samples_ms: Vec<f64>,
}

/// Least-squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; infinite with fewer than three points.
    pub slope_stderr: f64,
}

impl LineFit {
    /// The slope is within two standard errors of zero.
    pub fn slope_indistinguishable_from_zero(&self) -> bool {
        self.slope.abs() <= 1.96 * self.slope_stderr
    }
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len().min(ys.len());
    let mean = |v: &[f64]| v[..n].iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(xs), mean(ys));
    let sxx: f64 = xs[..n].iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs[..n].iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let slope_stderr = if n > 2 && sxx > 0.0 {
        let sse: f64 = xs[..n]
            .iter()
            .zip(ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        (sse / (n - 2) as f64 / sxx).sqrt()
    } else {
        f64::INFINITY
    };
    LineFit {
        slope,
        intercept,
        slope_stderr,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AlgorithmFit {
    pub algorithm: Algorithm,
    /// Fitted milliseconds per locator.
    pub alpha_ms: f64,
    pub intercept_ms: f64,
    pub alpha_stderr_ms: f64,
    pub alpha_indistinguishable_from_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SizePoint {
    pub algorithm: Algorithm,
    pub dom_size: usize,
    pub locators: usize,
    pub median_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TimingReport {
    pub dom_size: usize,
    pub repeats: usize,
    /// Median repair time per algorithm and locator count.
    pub points: Vec<TimingPoint>,
    pub fits: Vec<AlgorithmFit>,
    /// Smallest measured count at which ERRATUM's median is below WATER's.
    pub crossover: Option<usize>,
    /// Count at which the fitted lines intersect.
    pub fitted_crossover: Option<f64>,
    pub by_size: Vec<SizePoint>,
}

impl TimingReport {
    pub fn fit(&self, algorithm: Algorithm) -> Option<&AlgorithmFit> {
        self.fits.iter().find(|f| f.algorithm == algorithm)
    }

    pub fn median(&self, algorithm: Algorithm, locators: usize) -> Option<f64> {
        self.points
            .iter()
            .find(|p| p.algorithm == algorithm && p.locators == locators)
            .map(|p| p.median_ms)
    }
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

/// Wall-clock milliseconds of one repair of `locators`, with a fresh
/// matcher so that no matching is reused.
fn time_once(
    algorithm: Algorithm,
    old: &DomTree,
    new: &DomTree,
    locators: &[XPathLocator],
    config: &TimingConfig,
) -> Result<f64, BenchError> {
    let start = Instant::now();
    match algorithm {
        Algorithm::Erratum => {
            let engine = RepairEngine::new(config.sftm.clone())?;
            black_box(engine.repair(&RepairRequest {
                old_tree: old,
                new_tree: new,
                locators: locators.to_vec(),
            })?);
        }
        Algorithm::Water => {
            black_box(water_repair(old, new, locators, &config.water)?);
        }
    }
    Ok(start.elapsed().as_secs_f64() * 1e3)
}

fn locators_for(tree: &DomTree, k: usize, config: &TimingConfig) -> Result<Vec<XPathLocator>, BenchError> {
    select_targets(tree, k, config.seed, &config.clickable)
        .into_iter()
        .map(|t| absolute_xpath(tree, t).map_err(|e| BenchError::Repair(e.into())))
        .collect()
}

fn check(config: &TimingConfig) -> Result<(), BenchError> {
    if config.counts.is_empty() || config.counts[0] == 0 {
        return Err(BenchError::Config("locator counts must be positive".into()));
    }
    if config.counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(BenchError::Config("locator counts must be ascending".into()));
    }
    if config.repeats == 0 {
        return Err(BenchError::Config("at least one repeat is needed".into()));
    }
    if config.algorithms.is_empty() {
        return Err(BenchError::Config("no algorithm selected".into()));
    }
    Ok(())
}

/// Repair time against the number of locators on one version pair. Runs
/// are sequential, algorithms interleaved, and each point is the median of
/// `repeats` runs.
pub fn measure_timing(old: &DomTree, new: &DomTree, config: &TimingConfig) -> Result<TimingReport, BenchError> {
    check(config)?;
    let max = *config.counts.last().expect("counts checked");
    let locators = locators_for(old, max, config)?;
    if locators.len() < max {
        return Err(BenchError::Config(format!(
            "the page has {} clickable elements, {max} are needed",
            locators.len()
        )));
    }
    let algs = &config.algorithms;
    for &a in algs {
        time_once(a, old, new, &locators, config)?;
    }
    let mut samples = vec![vec![Vec::with_capacity(config.repeats); config.counts.len()]; algs.len()];
    for r in 0..config.repeats {
        for (c, &k) in config.counts.iter().enumerate() {
            for i in 0..algs.len() {
                // Alternate which algorithm runs first.
                let a = if r % 2 == 0 { i } else { algs.len() - 1 - i };
                samples[a][c].push(time_once(algs[a], old, new, &locators[..k], config)?);
            }
        }
    }

    let mut points = Vec::new();
    let mut fits = Vec::new();
    for (a, &algorithm) in algs.iter().enumerate() {
        let medians: Vec<f64> = samples[a].iter().map(|s| median(s)).collect();
        for (c, &k) in config.counts.iter().enumerate() {
            points.push(TimingPoint {
                algorithm,
                locators: k,
                median_ms: medians[c],
                samples_ms: samples[a][c].clone(),
            });
        }
        let xs: Vec<f64> = config.counts.iter().map(|&k| k as f64).collect();
        let f = fit_line(&xs, &medians);
        fits.push(AlgorithmFit {
            algorithm,
            alpha_ms: f.slope,
            intercept_ms: f.intercept,
            alpha_stderr_ms: f.slope_stderr,
            alpha_indistinguishable_from_zero: f.slope_indistinguishable_from_zero(),
        });
    }

    let mut report = TimingReport {
        dom_size: old.size(),
        repeats: config.repeats,
        points,
        fits,
        crossover: None,
        fitted_crossover: None,
        by_size: Vec::new(),
    };
    if let (Some(e), Some(w)) = (report.fit(Algorithm::Erratum), report.fit(Algorithm::Water)) {
        if w.alpha_ms > e.alpha_ms {
            report.fitted_crossover = Some(((e.intercept_ms - w.intercept_ms) / (w.alpha_ms - e.alpha_ms)).max(0.0));
        }
        report.crossover = config.counts.iter().copied().find(|&k| {
            matches!(
                (report.median(Algorithm::Erratum, k), report.median(Algorithm::Water, k)),
                (Some(e), Some(w)) if e < w
            )
        });
    }
    Ok(report)
}

/// Repair time against page size: each pair is repaired with the largest
/// configured locator count, or every clickable element if there are fewer.
/// Pairs without clickable elements are left out.
pub fn measure_size_scaling(
    pairs: &[(&DomTree, &DomTree)],
    config: &TimingConfig,
) -> Result<Vec<SizePoint>, BenchError> {
    check(config)?;
    let max = *config.counts.last().expect("counts checked");
    let mut out = Vec::new();
    for (old, new) in pairs {
        let locators = locators_for(old, max, config)?;
        if locators.is_empty() {
            continue;
        }
        let mut samples = vec![Vec::with_capacity(config.repeats); config.algorithms.len()];
        for r in 0..config.repeats {
            for i in 0..config.algorithms.len() {
                let a = if r % 2 == 0 { i } else { config.algorithms.len() - 1 - i };
                samples[a].push(time_once(config.algorithms[a], old, new, &locators, config)?);
            }
        }
        for (a, &algorithm) in config.algorithms.iter().enumerate() {
            out.push(SizePoint {
                algorithm,
                dom_size: old.size(),
                locators: locators.len(),
                median_ms: median(&samples[a]),
            });
        }
    }
    out.sort_by_key(|p| (p.algorithm, p.dom_size));
    Ok(out)
}
