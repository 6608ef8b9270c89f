//! Evaluation harness: target selection, outcome classification, accuracy
//! breakdowns and repair-time measurement for ERRATUM and WATER.

mod classify;
mod report;
mod run;
mod targets;
mod timing;

use thiserror::Error;

pub use classify::{classify, Algorithm, OutcomeLabel};
pub use report::{
    build_report, write_artifacts, AlgorithmSummary, BenchReport, BinSummary, Interval, LabelCounts, LabelRates,
    RATIO_BINS,
};
pub use run::{run_benchmark, BenchConfig, BenchRun, SkippedPair, Trial, TrialError};
pub use targets::{clickable, is_clickable, select_targets, ClickableConfig, DEFAULT_TARGETS};
pub use timing::{
    fit_line, measure_size_scaling, measure_timing, LineFit, SizePoint, TimingConfig, TimingPoint, TimingReport,
};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("the dataset has no mutant")]
    EmptyDataset,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Repair(#[from] erratum_core::RepairError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
}
