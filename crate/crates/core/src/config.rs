//! Training hyper-parameters.

use alloc::format;

use crate::error::{Error, Result};

/// Corpus and skip-gram settings shared by both model families.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainConfig {
    /// Maximum distance between a center token and its contexts.
    pub window: usize,
    /// Embedding dimensionality.
    pub dims: usize,
    /// Tokens occurring fewer times are dropped from the vocabulary.
    pub min_count: u64,
    /// Negative contexts drawn per positive pair.
    pub negatives: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Frequent-word subsampling threshold; 0 disables subsampling.
    pub subsample: f64,
    /// Initial learning rate; decays linearly to `lr / 100`.
    pub lr: f64,
    /// Draw the effective window uniformly from `1..=window` per center.
    pub dynamic_window: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            window: 5,
            dims: 50,
            min_count: 5,
            negatives: 5,
            epochs: 5,
            seed: 1,
            subsample: 0.0,
            lr: 0.025,
            dynamic_window: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 1 {
            return Err(Error::InvalidConfig("window must be at least 1".into()));
        }
        if self.dims < 1 {
            return Err(Error::InvalidConfig("dims must be at least 1".into()));
        }
        if self.min_count < 1 {
            return Err(Error::InvalidConfig("min_count must be at least 1".into()));
        }
        if self.negatives < 1 {
            return Err(Error::InvalidConfig("negatives must be at least 1".into()));
        }
        if !(self.subsample >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "subsample threshold must be non-negative, got {}",
                self.subsample
            )));
        }
        if !(self.lr > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                self.lr
            )));
        }
        Ok(())
    }
}

/// Settings specific to Gaussian-mixture embeddings.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GmTrainConfig {
    /// Hinge margin of the ranking loss.
    pub margin: f64,
    /// Mixture components per word.
    pub components: usize,
    /// Adagrad base learning rate.
    pub lr: f64,
    pub var_min: f64,
    pub var_max: f64,
    /// Initial (spherical) variance of every component.
    pub var_init: f64,
    /// Means are projected onto the ball of this radius.
    pub mu_max: f64,
    /// Negative contexts per positive pair.
    pub negatives: usize,
    /// Keep mixture weights uniform instead of learning them.
    pub freeze_weights: bool,
}

impl Default for GmTrainConfig {
    fn default() -> Self {
        GmTrainConfig {
            margin: 1.0,
            components: 2,
            lr: 0.05,
            var_min: 1e-4,
            var_max: 10.0,
            var_init: 0.05,
            mu_max: 10.0,
            negatives: 1,
            freeze_weights: false,
        }
    }
}

impl GmTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.margin > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "margin must be positive, got {}",
                self.margin
            )));
        }
        if self.components < 1 {
            return Err(Error::InvalidConfig("components must be at least 1".into()));
        }
        if !(self.var_min > 0.0 && self.var_min < self.var_max) {
            return Err(Error::InvalidConfig(format!(
                "need 0 < var_min < var_max, got {} and {}",
                self.var_min, self.var_max
            )));
        }
        if !(self.var_init >= self.var_min && self.var_init <= self.var_max) {
            return Err(Error::InvalidConfig(format!(
                "initial variance {} outside [{}, {}]",
                self.var_init, self.var_min, self.var_max
            )));
        }
        if !(self.mu_max > 0.0) {
            return Err(Error::InvalidConfig("mu_max must be positive".into()));
        }
        if !(self.lr > 0.0) {
            return Err(Error::InvalidConfig("learning rate must be positive".into()));
        }
        if self.negatives < 1 {
            return Err(Error::InvalidConfig("negatives must be at least 1".into()));
        }
        Ok(())
    }
}
