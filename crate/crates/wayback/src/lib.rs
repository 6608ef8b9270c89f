//! Pairs of archived versions of real pages.
//!
//! Versions are listed and fetched through a [`Transport`], either live
//! (rate limited) or replayed from recorded fixtures. Pairs are selected by
//! the time elapsed between the two versions.

mod archive;
mod dataset;
mod pairs;
mod timestamp;
mod transport;

use erratum_core::DomError;

pub use archive::{Archive, ArchiveConfig};
pub use dataset::{build_dataset, read_manifest, site_slug, EntryStatus, ManifestEntry, WaybackOptions};
pub use pairs::{build_pairs, VersionPairSpec, DEFAULT_MAX_PAIRS, GAP_BUCKETS, GAP_TOLERANCE};
pub use timestamp::{DateRange, Timestamp, TimestampError};
pub use transport::{FixtureTransport, HttpResponse, LiveTransport, Transport, TransportError};

#[derive(Debug, thiserror::Error)]
pub enum WaybackError {
    #[error("request to {url} failed: {source}")]
    Transport { url: String, source: TransportError },
    #[error("{url} answered HTTP {status}")]
    Status { url: String, status: u16 },
    #[error("snapshot {timestamp} of {url} is gone (HTTP {status})")]
    SnapshotGone {
        url: String,
        timestamp: Timestamp,
        status: u16,
    },
    #[error("malformed version listing from {url}: {message}")]
    Listing { url: String, message: String },
    #[error("invalid URL {0:?}")]
    Url(String),
    #[error(transparent)]
    Dom(#[from] DomError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid fixture: {0}")]
    Fixture(String),
    #[error("invalid manifest: {0}")]
    Manifest(String),
}

impl WaybackError {
    /// Network failures, rate limiting and server errors.
    pub fn is_retryable(&self) -> bool {
        match self {
            WaybackError::Transport { source, .. } => matches!(source, TransportError::Network(_)),
            WaybackError::Status { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }

    /// Short machine-readable cause, used as the prefix of skip reasons.
    pub fn reason(&self) -> &'static str {
        match self {
            WaybackError::Transport { .. } => "transport",
            WaybackError::Status { .. } => "http-status",
            WaybackError::SnapshotGone { .. } => "snapshot-gone",
            WaybackError::Listing { .. } => "malformed-listing",
            WaybackError::Url(_) => "invalid-url",
            WaybackError::Dom(_) => "unparseable",
            WaybackError::Io { .. } => "io",
            WaybackError::Fixture(_) => "fixture",
            WaybackError::Manifest(_) => "manifest",
        }
    }
}
