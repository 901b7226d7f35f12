//! Optional TOML run configuration mirroring the training flags. Values given
//! on the command line override values from the file, which override the
//! built-in defaults.

use std::path::Path;

use anyhow::Context;
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub data: Option<String>,
    pub label_column: Option<String>,
    pub standardize: Option<bool>,
    pub k: Option<usize>,
    pub beta: Option<f64>,
    pub steps: Option<usize>,
    pub step_factor: Option<f64>,
    pub metric: Option<String>,
    pub lr: Option<f64>,
    pub batch: Option<usize>,
    pub epochs: Option<usize>,
    pub restarts: Option<usize>,
    pub lr_reduce_factor: Option<f64>,
    pub lr_patience: Option<usize>,
    pub min_lr: Option<f64>,
    pub lr_threshold: Option<f64>,
    pub mask_prob: Option<f64>,
    pub mask_fill: Option<String>,
    pub variant: Option<String>,
    pub train_weights: Option<bool>,
    pub seed: Option<u64>,
    pub out: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}
