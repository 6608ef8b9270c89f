//! Synthetic version pairs: pages are signed node by node, mutated with
//! random structure, attribute and content operators, and the surviving
//! signatures give the exact ground-truth matching.

mod dataset;
mod kind;
mod mutate;
pub mod pages;

use erratum_core::dom::NodeId;
use erratum_core::DomError;
use thiserror::Error;

pub use dataset::{
    generate_corpus, generate_dataset, load_original, mutant_seed, read_corpus, sign_page, write_corpus, CorpusEntry,
    DatasetOptions,
};
pub use kind::{parse_kinds, Category, MutationKind};
pub use mutate::{mutate, normalize, GroundTruth, MutantRecord, MutationOp, Payload, RecordFile};

#[derive(Debug, Error)]
pub enum MutagenError {
    #[error("unknown mutation kind {0:?}")]
    UnknownKind(String),
    #[error("no mutation kinds selected")]
    NoKinds,
    #[error("mutation ratio {0} is outside [0, 1]")]
    Ratio(f64),
    #[error("invalid ratio range ({0}, {1}]")]
    RatioRange(f64, f64),
    #[error("no node is eligible for any of the requested kinds")]
    NoEligible,
    #[error("node {0} has no signature")]
    Unsigned(NodeId),
    #[error("signatures are not unique")]
    DuplicateSignature,
    #[error("no pages to mutate")]
    NoPages,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Dom(#[from] DomError),
}
