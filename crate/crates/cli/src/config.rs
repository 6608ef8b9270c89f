//! Settings file. Every key is optional; command-line flags take precedence
//! over the file, and the file over built-in defaults.

use std::path::Path;

use anyhow::{Context, Result};
use erratum_bench::{Algorithm, ClickableConfig};
use erratum_core::{SftmConfig, WaterConfig};
use serde::Deserialize;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub sftm: Option<SftmConfig>,
    pub water: Option<WaterConfig>,
    pub clickable: Option<ClickableConfig>,
    pub bench: BenchSection,
    pub dataset: DatasetSection,
    pub wayback: WaybackSection,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct BenchSection {
    pub algorithms: Option<Vec<Algorithm>>,
    pub targets: Option<usize>,
    pub repeats: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct DatasetSection {
    pub pages: Option<usize>,
    pub min_nodes: Option<usize>,
    pub max_nodes: Option<usize>,
    pub mutants: Option<usize>,
    pub min_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
    pub kinds: Option<String>,
    pub constrained: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct WaybackSection {
    pub from: Option<String>,
    pub to: Option<String>,
    pub max_pairs: Option<usize>,
    pub interval_ms: Option<u64>,
    pub retries: Option<u32>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("malformed config {}", path.display()))
    }

    pub fn sftm(&self, seed: u64) -> SftmConfig {
        self.sftm.clone().unwrap_or_default().with_seed(seed)
    }

    pub fn water(&self) -> WaterConfig {
        self.water.clone().unwrap_or_default()
    }

    pub fn clickable(&self) -> ClickableConfig {
        self.clickable.clone().unwrap_or_default()
    }
}
