//! Sequence forecasting model and trainer: a single-layer LSTM over
//! transition features, a vessel-type embedding concatenated to the final
//! hidden state, inverted dropout, one ReLU dense layer, and a linear
//! 2-D displacement head. Loss is batch RMSE; optimization is Adam with
//! early stopping on validation loss. All gradients are computed
//! analytically through time.

mod adam;
mod backward;
mod forward;
mod loss;
mod lstm;
mod params;
mod serialize;
#[cfg(test)]
pub(crate) mod test_support;
mod train;

pub use adam::{adam_step, adam_update_flat, AdamHyper, AdamState};
pub use backward::backward;
pub use forward::{model_forward, ForwardCache, ForwardMode};
pub use loss::rmse_loss;
pub use lstm::{lstm_cell_forward, GateActs, LstmState};
pub use params::{l2_distance, param_count, GateParams, Mat, ModelDims, ModelParams, GATE_NAMES};
pub use serialize::{deserialize_params, payload_bytes, serialize_params, serialized_len};
pub use train::{
    eval_loss, eval_sumsq, fit, fit_from, history_csv, train_one_epoch, EpochStats, TrainConfig,
    TrainOutcome,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("vessel type {vessel_type} outside embedding vocabulary of {vocab}")]
    Vocab { vessel_type: u32, vocab: usize },
    #[error("empty window")]
    EmptyWindow,
    #[error("empty {0} set")]
    EmptySet(&'static str),
    #[error("invalid training config: {0}")]
    BadConfig(String),
    #[error("training diverged at epoch {epoch}: non-finite loss")]
    Diverged { epoch: usize },
    #[error("parameter file format error: {0}")]
    Format(String),
}
