//! The `erratum` command line: tree matching, locator repair, mutation,
//! dataset construction and benchmarks.

mod config;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use erratum_bench::{
    clickable, measure_size_scaling, measure_timing, run_benchmark, write_artifacts, Algorithm, BenchConfig,
    TimingConfig, DEFAULT_TARGETS,
};
use erratum_core::dom::{eval_xpath, parse_html, to_html, DomTree, ParseConfig, XPathLocator};
use erratum_core::repair::repair_report;
use erratum_core::water::water_repair;
use erratum_core::{match_trees, RepairEngine, RepairRequest};
use erratum_mutagen::pages::synthetic_corpus;
use erratum_mutagen::{generate_corpus, mutate, parse_kinds, read_corpus, sign_page, write_corpus, DatasetOptions};
use erratum_wayback::{
    build_dataset, Archive, ArchiveConfig, DateRange, EntryStatus, FixtureTransport, LiveTransport, Transport,
    WaybackOptions, DEFAULT_MAX_PAIRS,
};

pub use config::FileConfig;

#[derive(Debug, Parser)]
#[command(
    name = "erratum",
    version,
    about = "Repair broken web element locators by matching DOM versions"
)]
struct Cli {
    /// TOML settings file.
    #[arg(long, global = true, env = "ERRATUM_CONFIG", value_name = "FILE")]
    config: Option<PathBuf>,
    /// Seed for every random choice. Defaults to 0.
    #[arg(long, global = true, env = "ERRATUM_SEED")]
    seed: Option<u64>,
    /// More diagnostics on stderr; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Match two versions of a page and print the matching as JSON.
    Match(PairArgs),
    /// Relocate the elements of XPath locators in a new page version.
    Repair(RepairArgs),
    /// Sign a page and derive one mutant with its ground truth.
    Mutate(MutateArgs),
    /// Build version-pair corpora.
    #[command(subcommand)]
    Dataset(DatasetCommand),
    /// Run the accuracy benchmark on a mutation corpus.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct PairArgs {
    old: PathBuf,
    new: PathBuf,
    /// Parse inputs as fragments instead of documents.
    #[arg(long)]
    fragment: bool,
    /// Write the JSON here instead of stdout.
    #[arg(short, long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RepairArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// Absolute or relative XPath; repeat for several locators.
    #[arg(long = "locator", required = true, value_name = "XPATH")]
    locators: Vec<String>,
    #[arg(long, default_value = "erratum", value_parser = parse_algorithm)]
    algo: Algorithm,
}

#[derive(Debug, Args)]
struct MutateArgs {
    page: PathBuf,
    /// Applied operations per node.
    #[arg(long, default_value_t = 0.1)]
    ratio: f64,
    /// Comma-separated kinds or categories, e.g. `structure,content:remove`.
    #[arg(long, default_value = "all")]
    kinds: String,
    #[arg(long)]
    fragment: bool,
    /// Directory receiving original.html, mutant.html and record.json.
    /// Without it a JSON document is printed.
    #[arg(short, long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum DatasetCommand {
    /// Mutation corpus from synthetic pages or a directory of pages.
    Gen(GenArgs),
    /// Version pairs of real sites from a web archive.
    Wayback(WaybackArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(short, long, value_name = "DIR")]
    out: PathBuf,
    /// Directory of `.html` source pages; synthetic pages otherwise.
    #[arg(long, value_name = "DIR")]
    pages: Option<PathBuf>,
    /// Parse source pages as fragments.
    #[arg(long)]
    fragment: bool,
    /// Number of synthetic pages.
    #[arg(long)]
    synthetic: Option<usize>,
    #[arg(long)]
    min_nodes: Option<usize>,
    #[arg(long)]
    max_nodes: Option<usize>,
    /// Mutants per page.
    #[arg(long)]
    mutants: Option<usize>,
    #[arg(long)]
    min_ratio: Option<f64>,
    #[arg(long)]
    max_ratio: Option<f64>,
    #[arg(long)]
    kinds: Option<String>,
    /// One randomly chosen kind per mutant.
    #[arg(long)]
    constrained: bool,
}

#[derive(Debug, Args)]
struct WaybackArgs {
    #[arg(short, long, value_name = "DIR")]
    out: PathBuf,
    /// Site to fetch; repeatable.
    #[arg(long = "url", value_name = "URL")]
    urls: Vec<String>,
    /// File with one URL per line; `#` starts a comment.
    #[arg(long, value_name = "FILE")]
    urls_file: Option<PathBuf>,
    /// Replay recorded responses from this directory instead of the network.
    #[arg(long, value_name = "DIR")]
    fixtures: Option<PathBuf>,
    /// First day of the capture range, YYYY-MM-DD.
    #[arg(long)]
    from: Option<String>,
    /// Last day of the capture range, YYYY-MM-DD.
    #[arg(long)]
    to: Option<String>,
    #[arg(long)]
    max_pairs: Option<usize>,
    /// Sites fetched concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Minimum delay between live requests.
    #[arg(long)]
    interval_ms: Option<u64>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Corpus directory written by `dataset gen`.
    corpus: PathBuf,
    #[arg(short, long, value_name = "DIR")]
    out: PathBuf,
    /// Comma-separated algorithms.
    #[arg(long, value_delimiter = ',', value_parser = parse_algorithm)]
    algo: Vec<Algorithm>,
    /// Targets sampled per pair.
    #[arg(long)]
    targets: Option<usize>,
    /// Also measure repair time; trials then run one at a time.
    #[arg(long)]
    timing: bool,
    /// Repeats per timing point.
    #[arg(long)]
    repeats: Option<usize>,
    /// Worker threads; defaults to every logical processor.
    #[arg(long)]
    jobs: Option<usize>,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse()
}

/// Runs the command line and returns the process exit code: 0 on success,
/// 1 on operational errors, 2 on usage errors.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .try_init();
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("erratum: error: {e:#}");
            1
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let seed = cli.seed.or(file.seed).unwrap_or(0);
    match cli.command {
        Command::Match(a) => cmd_match(a, &file, seed),
        Command::Repair(a) => cmd_repair(a, &file, seed),
        Command::Mutate(a) => cmd_mutate(a, seed),
        Command::Dataset(DatasetCommand::Gen(a)) => cmd_gen(a, &file, seed),
        Command::Dataset(DatasetCommand::Wayback(a)) => cmd_wayback(a, &file, seed),
        Command::Bench(a) => cmd_bench(a, &file, seed),
    }
}

fn read_page(path: &Path, fragment: bool) -> Result<DomTree> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let config = if fragment {
        ParseConfig::fragment()
    } else {
        ParseConfig::default()
    };
    parse_html(&bytes, &config).with_context(|| format!("cannot parse {}", path.display()))
}

fn emit_json(value: &serde_json::Value, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn cmd_match(a: PairArgs, file: &FileConfig, seed: u64) -> Result<()> {
    let old = read_page(&a.old, a.fragment)?;
    let new = read_page(&a.new, a.fragment)?;
    let m = match_trees(&old, &new, &file.sftm(seed))?;
    emit_json(&m.to_json(), a.out.as_deref())
}

fn cmd_repair(a: RepairArgs, file: &FileConfig, seed: u64) -> Result<()> {
    let old = read_page(&a.pair.old, a.pair.fragment)?;
    let new = read_page(&a.pair.new, a.pair.fragment)?;
    let locators: Vec<XPathLocator> = a.locators.iter().map(XPathLocator::new).collect();
    for l in &locators {
        eval_xpath(&old, l).with_context(|| format!("invalid XPath {:?}", l.as_str()))?;
    }
    let results = match a.algo {
        Algorithm::Erratum => RepairEngine::new(file.sftm(seed))?.repair(&RepairRequest {
            old_tree: &old,
            new_tree: &new,
            locators,
        })?,
        Algorithm::Water => water_repair(&old, &new, &locators, &file.water())?,
    };
    emit_json(&repair_report(a.algo.name(), &results), a.pair.out.as_deref())?;
    let failed: Vec<String> = results
        .iter()
        .filter_map(|r| r.as_ref().err())
        .map(|e| e.to_string())
        .collect();
    if !failed.is_empty() {
        bail!(
            "{} locator(s) could not be repaired: {}",
            failed.len(),
            failed.join("; ")
        );
    }
    Ok(())
}

fn cmd_mutate(a: MutateArgs, seed: u64) -> Result<()> {
    let page = read_page(&a.page, a.fragment)?;
    let kinds = parse_kinds(&a.kinds)?;
    let original = Arc::new(sign_page(&page)?);
    let record = mutate(&original, a.ratio, &kinds, seed)?;
    let record_json = serde_json::to_value(record.record_file())?;
    match a.out {
        Some(dir) => {
            fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
            let write = |name: &str, text: String| {
                let p = dir.join(name);
                fs::write(&p, text).with_context(|| format!("cannot write {}", p.display()))
            };
            write("original.html", to_html(&original))?;
            write("mutant.html", to_html(&record.mutant))?;
            write("record.json", serde_json::to_string_pretty(&record_json)? + "\n")
        }
        None => emit_json(
            &serde_json::json!({
                "original": to_html(&original),
                "mutant": to_html(&record.mutant),
                "record": record_json,
            }),
            None,
        ),
    }
}

/// `.html` files of a directory, sorted, named by file stem.
fn source_pages(dir: &Path, fragment: bool) -> Result<Vec<(String, DomTree)>> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("cannot read {}", dir.display()))? {
        let p = entry?.path();
        if p.extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("html") || e.eq_ignore_ascii_case("htm"))
        {
            paths.push(p);
        }
    }
    paths.sort();
    if paths.is_empty() {
        bail!("no .html page in {}", dir.display());
    }
    paths
        .iter()
        .map(|p| {
            let name = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok((name, read_page(p, fragment)?))
        })
        .collect()
}

fn cmd_gen(a: GenArgs, file: &FileConfig, seed: u64) -> Result<()> {
    let d = &file.dataset;
    let defaults = DatasetOptions::default();
    let options = DatasetOptions {
        mutants_per_page: a.mutants.or(d.mutants).unwrap_or(defaults.mutants_per_page),
        min_ratio: a.min_ratio.or(d.min_ratio).unwrap_or(defaults.min_ratio),
        max_ratio: a.max_ratio.or(d.max_ratio).unwrap_or(defaults.max_ratio),
        kinds: match a.kinds.as_ref().or(d.kinds.as_ref()) {
            Some(k) => parse_kinds(k)?,
            None => defaults.kinds,
        },
        constrained: a.constrained || d.constrained.unwrap_or(false),
    };
    let pages = match &a.pages {
        Some(dir) => source_pages(dir, a.fragment)?,
        None => synthetic_corpus(
            a.synthetic.or(d.pages).unwrap_or(20),
            a.min_nodes.or(d.min_nodes).unwrap_or(500),
            a.max_nodes.or(d.max_nodes).unwrap_or(3000),
            seed,
        ),
    };
    let corpus = generate_corpus(&pages, &options, seed)?;
    write_corpus(&a.out, &corpus)?;
    let mutants: usize = corpus.iter().map(|e| e.mutants.len()).sum();
    log::info!(
        "wrote {mutants} mutants of {} pages to {}",
        corpus.len(),
        a.out.display()
    );
    Ok(())
}

fn parse_day(s: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").with_context(|| format!("invalid date {s:?}, expected YYYY-MM-DD"))
}

fn cmd_wayback(a: WaybackArgs, file: &FileConfig, seed: u64) -> Result<()> {
    let w = &file.wayback;
    let mut urls = a.urls.clone();
    if let Some(p) = &a.urls_file {
        let text = fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
        urls.extend(
            text.lines()
                .map(|l| l.split('#').next().unwrap_or("").trim())
                .filter(|l| !l.is_empty())
                .map(String::from),
        );
    }
    if urls.is_empty() {
        bail!("no URL given; use --url or --urls-file");
    }
    let (Some(from), Some(to)) = (a.from.as_ref().or(w.from.as_ref()), a.to.as_ref().or(w.to.as_ref())) else {
        bail!("the capture range needs --from and --to");
    };
    let range = DateRange::new(parse_day(from)?, parse_day(to)?);
    if range.from > range.to {
        bail!("--from is after --to");
    }
    let transport: Box<dyn Transport> = match &a.fixtures {
        Some(dir) => Box::new(FixtureTransport::open(dir)?),
        None => Box::new(LiveTransport::new(
            Duration::from_millis(a.interval_ms.or(w.interval_ms).unwrap_or(1000)),
            Duration::from_secs(60),
        )),
    };
    let mut archive_config = ArchiveConfig::default();
    if let Some(r) = w.retries {
        archive_config.retries = r;
    }
    let archive = Archive::new(transport, archive_config);
    let options = WaybackOptions {
        max_pairs: a.max_pairs.or(w.max_pairs).unwrap_or(DEFAULT_MAX_PAIRS),
        seed,
        jobs: a.jobs,
        ..WaybackOptions::new(range)
    };
    let manifest = build_dataset(&archive, &urls, &options, &a.out)?;
    let ok = manifest.iter().filter(|e| e.status == EntryStatus::Ok).count();
    log::info!("{ok} of {} pairs fetched into {}", manifest.len(), a.out.display());
    Ok(())
}

fn cmd_bench(a: BenchArgs, file: &FileConfig, seed: u64) -> Result<()> {
    let corpus = read_corpus(&a.corpus)?;
    let algorithms = if a.algo.is_empty() {
        file.bench.algorithms.clone().unwrap_or_else(|| Algorithm::ALL.to_vec())
    } else {
        a.algo.clone()
    };
    let targets = a.targets.or(file.bench.targets).unwrap_or(DEFAULT_TARGETS);
    let config = BenchConfig {
        algorithms: algorithms.clone(),
        targets_per_page: targets,
        seed,
        jobs: a.jobs.or(file.jobs).unwrap_or(0),
        clickable: file.clickable(),
        sftm: file.sftm(seed),
        water: file.water(),
        timed: a.timing,
    };
    let run = run_benchmark(&corpus, &config)?;
    let mut report = run.report();
    if a.timing {
        let timing = TimingConfig {
            counts: (1..=targets).collect(),
            repeats: a.repeats.or(file.bench.repeats).unwrap_or(5),
            seed,
            algorithms,
            sftm: config.sftm.clone(),
            water: config.water.clone(),
            clickable: config.clickable.clone(),
        };
        report.timing = timing_series(&corpus, &timing)?;
    }
    write_artifacts(&a.out, &run, &report)?;
    for s in &report.algorithms {
        eprintln!(
            "{}: {} trials, correct {:.3}, mismatch {:.3}, no-match {:.3}",
            s.algorithm, s.stats.trials, s.stats.ratios.correct, s.stats.ratios.mismatch, s.stats.ratios.no_match
        );
    }
    if !report.errors.is_empty() {
        log::warn!("{} trials failed and were counted as no-match", report.errors.len());
    }
    Ok(())
}

/// Timing against locator count on the pair whose page size is closest to
/// 1,500 nodes among those with enough clickable elements, and timing
/// against size over the first mutant of every page.
fn timing_series(
    corpus: &[erratum_mutagen::CorpusEntry],
    config: &TimingConfig,
) -> Result<Option<erratum_bench::TimingReport>> {
    let pairs: Vec<(&DomTree, &DomTree, usize)> = corpus
        .iter()
        .filter_map(|e| {
            let m = e.mutants.first()?;
            Some((&*e.original, &m.mutant, clickable(&e.original, &config.clickable).len()))
        })
        .collect();
    let want = *config.counts.last().unwrap_or(&1);
    let pick = pairs
        .iter()
        .filter(|p| p.2 >= want)
        .min_by_key(|p| p.0.size().abs_diff(1500))
        .or_else(|| pairs.iter().max_by_key(|p| p.2));
    let Some(&(old, new, available)) = pick else {
        log::warn!("no version pair to time");
        return Ok(None);
    };
    let mut config = config.clone();
    config.counts.retain(|&k| k <= available);
    if config.counts.len() < 2 {
        log::warn!("no page has two clickable elements; timing skipped");
        return Ok(None);
    }
    let mut report = measure_timing(old, new, &config)?;
    let all: Vec<(&DomTree, &DomTree)> = pairs.iter().map(|p| (p.0, p.1)).collect();
    report.by_size = measure_size_scaling(&all, &config)?;
    Ok(Some(report))
}
