//! Locator repair through similarity-based flexible tree matching.
//!
//! The crate is organized bottom-up:
//!
//! - [`dom`]: canonical DOM trees parsed from HTML, node labels and XPath
//!   locators;
//! - [`sftm`]: the three-stage tree matcher (token similarity, topological
//!   propagation, Metropolis optimization);
//! - [`repair`]: relocation of locator targets through a tree matching;
//! - [`water`]: the per-element baseline relocator used for comparison.

pub mod dom;
pub mod error;
pub mod repair;
pub mod sftm;
pub mod water;

pub use error::{DomError, RepairError, SftmError};
pub use repair::{repair, RepairEngine, RepairOutcome, RepairRequest, RepairStatus};
pub use sftm::{match_trees, Matching, SftmConfig};
pub use water::{water_relocate, WaterConfig};
