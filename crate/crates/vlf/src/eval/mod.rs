//! Model evaluation and data diagnostics: horizon-bucketed displacement
//! error in meters, a two-component projection of the feature space, and
//! kernel density maps of position/displacement clouds.

mod fde;
mod kde;
mod pca;

pub use fde::{
    bucket_index, bucket_by_horizon, displacement, evaluate_model, evaluate_with, fde,
    table_csv, table_markdown, BucketStat, FdeBucketTable, PredictionSample, BUCKET_WIDTH_S,
    MAX_HORIZON_S, N_BUCKETS,
};
pub use kde::{kde2, kde_csv, GridSpec, KdeMap};
pub use pca::{pca2, Pca2};

use crate::nn::NnError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no samples to evaluate")]
    Empty,
    #[error("horizon {0}s outside (0, 3600]")]
    BadHorizon(f64),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("bad grid: {0}")]
    BadGrid(String),
    #[error(transparent)]
    Nn(#[from] NnError),
}
