//! Core algorithms for training word embeddings and evaluating
//! out-of-vocabulary (OOV) word prediction.
//!
//! The crate is `no_std` and only needs an allocator. It covers:
//!
//! * tokenization, vocabulary construction, subsampling, skip-gram pairs and
//!   negative sampling ([`tokenize`], [`vocab`], [`pairs`]);
//! * skip-gram negative-sampling point embeddings ([`point`]);
//! * Gaussian-mixture embeddings trained with a max-margin ranking loss over
//!   the expected-likelihood energy ([`gm`]);
//! * similarity metrics and nearest-neighbor queries ([`similarity`]);
//! * the OOV category-classification and attribute-prediction tasks
//!   ([`tasks`]).
//!
//! File formats, dataset loading, multi-worker training and the command line
//! live in the companion `oov-embed` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod config;
pub mod error;
pub mod gm;
pub mod math;
pub mod pairs;
pub mod point;
pub mod similarity;
pub mod stopwords;
pub mod synthetic;
pub mod tasks;
pub mod tokenize;
pub mod vocab;

pub use config::{GmTrainConfig, TrainConfig};
pub use error::{Error, Result};
pub use gm::GmEmbedding;
pub use math::Real;
pub use point::PointEmbedding;
pub use similarity::{Metric, ModelRef, Query};
pub use tasks::{CategorySet, EvalReport, OovSample};
pub use vocab::Vocabulary;
