use thiserror::Error;

use crate::dom::NodeId;

#[derive(Debug, Error)]
pub enum DomError {
    #[error("empty document")]
    EmptyInput,
    #[error("document has no root element")]
    NoRoot,
    #[error("fragment has {0} top-level elements, expected exactly one")]
    FragmentRoots(usize),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("invalid xpath {expr:?} at offset {offset}: {reason}")]
    XPathSyntax {
        expr: String,
        offset: usize,
        reason: String,
    },
    #[error("unsupported xpath construct in {expr:?}: {construct}")]
    XPathUnsupported { expr: String, construct: String },
    #[error("malformed tree json: {0}")]
    Json(String),
}

#[derive(Debug, Error)]
pub enum SftmError {
    #[error("cannot match an empty tree")]
    EmptyTree,
    #[error("similarity table was computed for a different tree pair")]
    Provenance,
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Error)]
pub enum RepairError {
    #[error("locator {locator:?} is invalid on the old tree: {source}")]
    InvalidLocator {
        locator: String,
        #[source]
        source: DomError,
    },
    #[error("locator {0:?} selects nothing on the old tree")]
    EmptyLocator(String),
    #[error(transparent)]
    Matching(#[from] SftmError),
    #[error(transparent)]
    Dom(#[from] DomError),
    #[error("invalid configuration: {0}")]
    Config(String),
}
