//! Similarity-based flexible tree matching.
//!
//! Matching runs in three stages:
//!
//! 1. [`initial_similarity`] indexes node labels and scores every pair of
//!    nodes sharing a rare token (`s0`);
//! 2. [`propagate`] adds structurally aligned candidate pairs and lets the
//!    similarity of parents and children reinforce each other (`s`);
//! 3. [`optimize`] searches an injective matching with a Metropolis walk.
//!
//! [`match_trees`] composes the three.

mod index;
mod optimize;
mod propagate;

use serde::{Deserialize, Serialize};

pub use index::{initial_similarity, SimilarityTable, Stage, TokenEntry, TokenIndex};
pub use optimize::{optimize, MatchedPair, Matching};
pub use propagate::propagate;

use crate::dom::{DomTree, TokenizerConfig};
use crate::error::SftmError;

/// Tuning knobs of the matcher. `None` fields are derived from the input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct SftmConfig {
    pub tokenizer: TokenizerConfig,
    /// Tokens never used for similarity.
    pub ignored_tokens: Vec<String>,
    /// A token is dropped when `count_T(t) * count_T'(t)` exceeds this value.
    /// Defaults to `max(prune_floor, sqrt(|T| * |T'|))`.
    pub prune_threshold: Option<f64>,
    pub prune_floor: f64,
    /// Token weight is `1 / (count_T(t) * count_T'(t))^weight_exponent`.
    pub weight_exponent: f64,
    /// Weight of the parent and of the children terms during propagation.
    pub propagation_weight: f64,
    /// Propagation passes. Defaults to the depth of the deeper tree plus one,
    /// stopping early at a fixed point.
    pub passes: Option<usize>,
    /// Pairs whose `s0` is maximal in both their row and column seed the
    /// structural alignment of their children.
    pub align_children: bool,
    /// Metropolis iterations per movable pair.
    pub budget_factor: f64,
    pub max_iterations: Option<u64>,
    /// Defaults to `median|delta| / ln 2`, estimated from the initial state.
    pub initial_temperature: Option<f64>,
    pub cooling: f64,
    /// Cost charged per matched pair. Pairs scoring at most this much are
    /// never matched. Defaults to `penalty_factor * median(s)`.
    pub penalty: Option<f64>,
    pub penalty_factor: f64,
    pub seed: u64,
}

impl Default for SftmConfig {
    fn default() -> Self {
        SftmConfig {
            tokenizer: TokenizerConfig::default(),
            ignored_tokens: Vec::new(),
            prune_threshold: None,
            prune_floor: 64.0,
            weight_exponent: 1.0,
            propagation_weight: 0.4,
            passes: None,
            align_children: true,
            budget_factor: 30.0,
            max_iterations: None,
            initial_temperature: None,
            cooling: 0.999,
            penalty: None,
            penalty_factor: 0.25,
            seed: 0,
        }
    }
}

impl SftmConfig {
    pub fn validate(&self) -> Result<(), SftmError> {
        fn positive(name: &str, v: f64) -> Result<(), SftmError> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(SftmError::Config(format!("{name} must be positive, got {v}")))
            }
        }
        if let Some(t) = self.prune_threshold {
            positive("pruneThreshold", t)?;
        }
        positive("pruneFloor", self.prune_floor)?;
        positive("weightExponent", self.weight_exponent)?;
        positive("propagationWeight", self.propagation_weight)?;
        positive("budgetFactor", self.budget_factor)?;
        positive("cooling", self.cooling)?;
        if self.cooling > 1.0 {
            return Err(SftmError::Config(format!(
                "cooling must be at most 1, got {}",
                self.cooling
            )));
        }
        if let Some(t) = self.initial_temperature {
            positive("initialTemperature", t)?;
        }
        if let Some(p) = self.penalty {
            positive("penalty", p)?;
        }
        positive("penaltyFactor", self.penalty_factor)?;
        if self.passes == Some(0) {
            return Err(SftmError::Config("passes must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Matches `old` against `new`. Signatures are never consulted.
pub fn match_trees(old: &DomTree, new: &DomTree, config: &SftmConfig) -> Result<Matching, SftmError> {
    config.validate()?;
    let (_, s0) = initial_similarity(old, new, config)?;
    let s = propagate(&s0, old, new, config)?;
    optimize(&s, old, new, config)
}
