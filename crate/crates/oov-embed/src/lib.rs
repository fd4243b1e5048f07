//! File formats, multi-worker training, OOV evaluation reports and the
//! command-line interface built on `oov-embed-core`.

pub mod cli;
pub mod config;
pub mod corpus;
pub mod dataset;
pub mod error;
pub mod model_io;
pub mod report;
pub mod train;

pub use error::{Error, Result};
