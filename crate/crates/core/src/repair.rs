//! Relocation of locator targets through a tree matching.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use serde::Serialize;
use serde_json::{json, Value};

use crate::dom::{absolute_xpath, eval_xpath, DomTree, NodeId, XPathLocator};
use crate::error::{RepairError, SftmError};
use crate::sftm::{match_trees, Matching, SftmConfig};

pub struct RepairRequest<'a> {
    pub old_tree: &'a DomTree,
    pub new_tree: &'a DomTree,
    pub locators: Vec<XPathLocator>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepairStatus {
    Relocated,
    NoMatch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ElementOutcome {
    pub old_node: NodeId,
    #[serde(rename = "oldXPath")]
    pub old_xpath: XPathLocator,
    pub status: RepairStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub new_node: Option<NodeId>,
    #[serde(rename = "newXPath", skip_serializing_if = "Option::is_none")]
    pub new_xpath: Option<XPathLocator>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

impl ElementOutcome {
    pub(crate) fn new(
        old: &DomTree,
        new: &DomTree,
        old_node: NodeId,
        found: Option<(NodeId, f64)>,
    ) -> Result<ElementOutcome, RepairError> {
        let old_xpath = absolute_xpath(old, old_node)?;
        Ok(match found {
            Some((n, score)) => ElementOutcome {
                old_node,
                old_xpath,
                status: RepairStatus::Relocated,
                new_node: Some(n),
                new_xpath: Some(absolute_xpath(new, n)?),
                score: Some(score),
            },
            None => ElementOutcome {
                old_node,
                old_xpath,
                status: RepairStatus::NoMatch,
                new_node: None,
                new_xpath: None,
                score: None,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepairOutcome {
    #[serde(rename = "descriptor")]
    pub locator: XPathLocator,
    pub elements: Vec<ElementOutcome>,
}

/// Result for one locator: its outcome, or why it could not be evaluated.
pub type LocatorResult = Result<RepairOutcome, RepairError>;

/// Evaluates a locator on the old tree; an empty selection is an error.
pub(crate) fn targets(tree: &DomTree, locator: &XPathLocator) -> Result<Vec<NodeId>, RepairError> {
    let nodes = eval_xpath(tree, locator).map_err(|source| RepairError::InvalidLocator {
        locator: locator.descriptor.clone(),
        source,
    })?;
    if nodes.is_empty() {
        return Err(RepairError::EmptyLocator(locator.descriptor.clone()));
    }
    Ok(nodes)
}

/// Builds the report document for a batch of locator results.
pub fn repair_report(algorithm: &str, results: &[LocatorResult]) -> Value {
    let locators: Vec<Value> = results
        .iter()
        .map(|r| match r {
            Ok(o) => serde_json::to_value(o).expect("outcome is serializable"),
            Err(e) => {
                let descriptor = match e {
                    RepairError::InvalidLocator { locator, .. } | RepairError::EmptyLocator(locator) => {
                        Value::String(locator.clone())
                    }
                    _ => Value::Null,
                };
                json!({"descriptor": descriptor, "error": e.to_string()})
            }
        })
        .collect();
    json!({"algorithm": algorithm, "locators": locators})
}

type CacheKey = (String, String, String);

/// Repairs locators through SFTM matchings, computing each (old, new, config)
/// matching once.
pub struct RepairEngine {
    config: SftmConfig,
    config_key: String,
    cache: RwLock<HashMap<CacheKey, Arc<Matching>>>,
    computed: AtomicU64,
}

impl RepairEngine {
    pub fn new(config: SftmConfig) -> Result<RepairEngine, RepairError> {
        config.validate()?;
        let config_key = serde_json::to_string(&config).map_err(|e| RepairError::Config(e.to_string()))?;
        Ok(RepairEngine {
            config,
            config_key,
            cache: RwLock::new(HashMap::new()),
            computed: AtomicU64::new(0),
        })
    }

    pub fn config(&self) -> &SftmConfig {
        &self.config
    }

    /// Number of tree matchings computed so far (cache misses).
    pub fn matchings_computed(&self) -> u64 {
        self.computed.load(Ordering::Relaxed)
    }

    pub fn clear_cache(&self) {
        self.cache.write().expect("cache lock poisoned").clear();
    }

    pub fn matching(&self, old: &DomTree, new: &DomTree) -> Result<Arc<Matching>, SftmError> {
        let key = (
            old.digest().to_owned(),
            new.digest().to_owned(),
            self.config_key.clone(),
        );
        if let Some(m) = self.cache.read().expect("cache lock poisoned").get(&key) {
            return Ok(Arc::clone(m));
        }
        let m = Arc::new(match_trees(old, new, &self.config)?);
        self.computed.fetch_add(1, Ordering::Relaxed);
        let mut cache = self.cache.write().expect("cache lock poisoned");
        Ok(Arc::clone(cache.entry(key).or_insert(m)))
    }

    /// Counterpart of a single old-tree node.
    pub fn relocate(&self, old: &DomTree, new: &DomTree, node: NodeId) -> Result<Option<(NodeId, f64)>, RepairError> {
        old.checked(node)?;
        let m = self.matching(old, new)?;
        Ok(m.right_of(node).map(|p| (p.right, p.score)))
    }

    /// Relocates every element selected by every locator. Matching failures
    /// abort the whole request; locator problems are reported per locator.
    pub fn repair(&self, request: &RepairRequest<'_>) -> Result<Vec<LocatorResult>, RepairError> {
        let m = self.matching(request.old_tree, request.new_tree)?;
        Ok(request
            .locators
            .iter()
            .map(|loc| {
                let elements = targets(request.old_tree, loc)?
                    .into_iter()
                    .map(|e| {
                        let found = m.right_of(e).map(|p| (p.right, p.score));
                        ElementOutcome::new(request.old_tree, request.new_tree, e, found)
                    })
                    .collect::<Result<_, _>>()?;
                Ok(RepairOutcome {
                    locator: loc.clone(),
                    elements,
                })
            })
            .collect())
    }
}

/// One-shot repair with a fresh engine.
pub fn repair(request: &RepairRequest<'_>, config: &SftmConfig) -> Result<Vec<LocatorResult>, RepairError> {
    RepairEngine::new(config.clone())?.repair(request)
}
