//! Training configuration files.
//!
//! A config file is a flat list of `key = value` lines (a TOML subset).
//! Keys are the field names of the training configurations plus `model`,
//! `workers` and `k` (mixture components). Command-line flags take
//! precedence over the file.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<String>,
    pub workers: Option<usize>,
    pub window: Option<usize>,
    pub dims: Option<usize>,
    pub min_count: Option<u64>,
    pub negatives: Option<usize>,
    pub epochs: Option<usize>,
    pub seed: Option<u64>,
    pub subsample: Option<f64>,
    pub lr: Option<f64>,
    pub dynamic_window: Option<bool>,
    pub k: Option<usize>,
    pub margin: Option<f64>,
    pub gm_lr: Option<f64>,
    pub var_min: Option<f64>,
    pub var_max: Option<f64>,
    pub var_init: Option<f64>,
    pub mu_max: Option<f64>,
    pub gm_negatives: Option<usize>,
    pub freeze_weights: Option<bool>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}
