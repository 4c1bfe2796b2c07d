//! Zero-day intrusion detection on NetFlow records: data loading and
//! synthesis, zero-day train/test splitting, standardization, correlation
//! pruning and PCA, SMOTE oversampling, five classifiers, cross-validated grid
//! search, and an experiment harness that ties them together.

pub mod classifiers;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod linalg;
pub mod oracle;
pub mod preprocess;
pub mod rng;
pub mod smote;
pub mod split;

pub use error::{Error, Result};
