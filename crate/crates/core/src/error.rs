use alloc::string::String;

use crate::models::ModelId;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("environmental factor e{index} = {value} is outside [0, 5]")]
    RatingOutOfRange { index: usize, value: f64 },
    #[error("non-positive UCP {0}")]
    NonPositiveUcp(f64),
    #[error("non-positive effort {0}")]
    NonPositiveEffort(f64),
    #[error("non-positive value in prediction pair (actual {actual}, estimated {estimated})")]
    NonPositivePair { actual: f64, estimated: f64 },
    #[error("need at least {required} values, got {actual}")]
    InsufficientData { required: usize, actual: usize },
    #[error("input lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("bootstrap replicate has an empty out-of-bag set")]
    DegenerateReplicate,
    #[error("every one of {0} bootstrap replicates had an empty out-of-bag set")]
    AllReplicatesDegenerate(usize),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("weights sum to zero")]
    ZeroWeightSum,
    #[error("{model} training failed: {reason}")]
    Training { model: ModelId, reason: String },
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
}
