//! Weighted ensemble of seven productivity regressors for Use Case Points
//! effort estimation.
//!
//! Productivity (hours per UCP) is learned from the eight environmental
//! factor ratings of a project. Each base model is scored on bootstrap
//! out-of-bag samples; the resulting MAE, MBRE and MIBRE values are min-max
//! normalized and pushed through a sigmoid discount to obtain aggregation
//! weights. Effort is the weighted-mean productivity times the project's UCP.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, reports and
//! the command-line front end live in the `ucp-ensemble` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dataset;
pub mod ensemble;
mod error;
pub mod evaluation;
pub mod linalg;
pub mod metrics;
pub mod models;
pub mod rng;
pub mod special;

pub use dataset::{Dataset, DatasetProfile, DescriptiveStats, EnvFactors, ProjectRecord};
pub use ensemble::{EnsembleConfig, LocalErrorProfile, ModelWeightProfile, TrainedEnsemble};
pub use error::{Error, Result};
pub use evaluation::{ComparisonReport, Estimator, FoldOutcome, WilcoxonResult};
pub use metrics::{ErrorSummary, PredictionPair};
pub use models::{ModelConfig, ModelId, TrainedModel};
