//! Cross-silo federated training. A coordinator broadcasts global
//! parameters, each silo runs local epochs on its own data (optionally
//! with a proximal pull toward the broadcast parameters), and the
//! coordinator aggregates the returned updates weighted by sample count.
//! Raw data never leaves a silo: the only cross-silo traffic is serialized
//! parameters, and `SiloHandle` exposes no accessor for its windows.

mod aggregate;
mod comm;
mod round;

pub use aggregate::aggregate;
pub use comm::{comm_cost, CommCostReport};
pub use round::{round_log_csv, run_federation, RoundLog, SiloRoundStats};

pub use crate::nn::l2_distance;

use crate::eval::{evaluate_model, EvalError, FdeBucketTable};
use crate::features::{Standardizer, TrainingWindow};
use crate::nn::{
    eval_loss, eval_sumsq, fit_from, train_one_epoch, AdamState, ModelParams, NnError,
    TrainConfig, TrainOutcome,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FedError {
    #[error("no silos supplied")]
    NoSilos,
    #[error("need at least two silos, got {0}")]
    TooFewSilos(usize),
    #[error("duplicate silo id '{0}'")]
    DuplicateSiloId(String),
    #[error("no updates to aggregate")]
    NoUpdates,
    #[error("all aggregation weights are zero")]
    ZeroWeights,
    #[error("update shape mismatch: {0}")]
    DimMismatch(String),
    #[error("every silo diverged in round {round}")]
    AllDiverged { round: usize },
    #[error("invalid federation config: {0}")]
    BadConfig(String),
    #[error("centralized cost is zero; reduction undefined")]
    ZeroCentralized,
    #[error("byte count overflow")]
    Overflow,
    #[error(transparent)]
    Nn(#[from] NnError),
}

/// Which local objective silos optimize: plain local loss (weighted
/// averaging only) or the loss plus a proximal term (mu/2)||w - w_global||^2.
/// `fedavg` behaves exactly like `fedprox` at mu = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    FedAvg,
    FedProx,
}

/// Federation schedule and local-training knobs. Defaults: 70 rounds,
/// 1 local epoch per round, proximal mu 1e-3, 10 fine-tuning epochs with
/// patience 3 for personalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FedConfig {
    pub rounds: usize,
    pub algorithm: Algorithm,
    pub mu_prox: f64,
    pub local_epochs: usize,
    pub personalize_epochs: usize,
    pub personalize_patience: usize,
    pub train: TrainConfig,
}

impl Default for FedConfig {
    fn default() -> Self {
        FedConfig {
            rounds: 70,
            algorithm: Algorithm::FedProx,
            mu_prox: 1e-3,
            local_epochs: 1,
            personalize_epochs: 10,
            personalize_patience: 3,
            train: TrainConfig::default(),
        }
    }
}

impl FedConfig {
    pub fn validate(&self) -> Result<(), FedError> {
        if self.rounds == 0 {
            return Err(FedError::BadConfig("rounds must be at least 1".into()));
        }
        if !(self.mu_prox.is_finite() && self.mu_prox >= 0.0) {
            return Err(FedError::BadConfig(format!(
                "mu_prox {} must be finite and non-negative",
                self.mu_prox
            )));
        }
        if self.local_epochs == 0 {
            return Err(FedError::BadConfig("local_epochs must be at least 1".into()));
        }
        if self.personalize_epochs == 0
            || self.personalize_patience == 0
            || self.personalize_patience > self.personalize_epochs
        {
            return Err(FedError::BadConfig(format!(
                "personalization epochs {} / patience {} invalid",
                self.personalize_epochs, self.personalize_patience
            )));
        }
        self.train.validate().map_err(FedError::Nn)
    }

    /// The proximal coefficient actually applied by local training.
    pub fn effective_mu(&self) -> f64 {
        match self.algorithm {
            Algorithm::FedAvg => 0.0,
            Algorithm::FedProx => self.mu_prox,
        }
    }
}

/// Per-epoch local training losses and the local model's validation loss.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalLosses {
    pub train: Vec<f64>,
    pub val: f64,
}

/// One participant: its private splits, its standardizer, and its RNG seed.
/// Fields are private on purpose; the coordinator can see counts and run
/// training or evaluation, never the windows themselves.
#[derive(Debug, Clone)]
pub struct SiloHandle {
    id: String,
    train: Vec<TrainingWindow>,
    val: Vec<TrainingWindow>,
    test: Vec<TrainingWindow>,
    standardizer: Standardizer,
    seed: u64,
}

impl SiloHandle {
    pub fn new(
        id: impl Into<String>,
        train: Vec<TrainingWindow>,
        val: Vec<TrainingWindow>,
        test: Vec<TrainingWindow>,
        standardizer: Standardizer,
        seed: u64,
    ) -> Result<Self, FedError> {
        let id = id.into();
        if id.is_empty()
            || id == "aggregate"
            || id.contains(|c: char| c == ',' || c == '"' || c.is_control())
        {
            return Err(FedError::BadConfig(format!("unusable silo id '{id}'")));
        }
        if train.is_empty() {
            return Err(FedError::BadConfig(format!("silo '{id}' has no training windows")));
        }
        if val.is_empty() {
            return Err(FedError::BadConfig(format!("silo '{id}' has no validation windows")));
        }
        Ok(SiloHandle {
            id,
            train,
            val,
            test,
            standardizer,
            seed,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Aggregation weight: number of training windows.
    pub fn sample_count(&self) -> usize {
        self.train.len()
    }

    pub fn val_count(&self) -> usize {
        self.val.len()
    }

    pub fn test_count(&self) -> usize {
        self.test.len()
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }

    /// Local training pass: clones the broadcast parameters, runs the given
    /// number of epochs with a fresh optimizer, and returns the update with
    /// its losses. `mu` > 0 adds the proximal gradient term mu*(w - w_global).
    /// Deterministic given the silo seed.
    pub fn local_train(
        &self,
        global: &ModelParams,
        epochs: usize,
        mu: f64,
        cfg: &TrainConfig,
    ) -> Result<(ModelParams, LocalLosses), NnError> {
        let mut params = global.clone();
        let mut adam = AdamState::new(params.param_count());
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(2);
        let mut train_losses = Vec::with_capacity(epochs);
        for epoch in 1..=epochs {
            let loss =
                train_one_epoch(&mut params, &mut adam, &self.train, cfg, &mut rng, Some((global, mu)))
                    .map_err(|e| match e {
                        NnError::Diverged { .. } => NnError::Diverged { epoch },
                        other => other,
                    })?;
            if !loss.is_finite() || !params.is_finite() {
                return Err(NnError::Diverged { epoch });
            }
            train_losses.push(loss);
        }
        let val = eval_loss(&params, &self.val)?;
        if !val.is_finite() {
            return Err(NnError::Diverged { epoch: epochs });
        }
        Ok((params, LocalLosses { train: train_losses, val }))
    }

    /// Fine-tunes the global model on this silo's own data with early
    /// stopping against the silo's validation split. The baseline is the
    /// global model's validation loss, so the result is never worse than
    /// the global model on this silo's validation data.
    pub fn personalize(
        &self,
        global: &ModelParams,
        cfg: &FedConfig,
    ) -> Result<TrainOutcome, NnError> {
        let baseline = eval_loss(global, &self.val)?;
        let mut tc = cfg.train;
        tc.max_epochs = cfg.personalize_epochs;
        tc.patience = cfg.personalize_patience;
        tc.seed = self.seed;
        fit_from(global.clone(), &self.train, &self.val, &tc, Some(baseline))
    }

    /// Validation sum of squared errors under the given parameters, for
    /// pooling into a cross-silo validation loss.
    pub fn val_sumsq(&self, params: &ModelParams) -> Result<(f64, usize), NnError> {
        eval_sumsq(params, &self.val)
    }

    /// Horizon-bucketed displacement error of `params` on this silo's test
    /// split, de-standardized through the silo's own standardizer.
    pub fn test_fde_table(&self, params: &ModelParams) -> Result<FdeBucketTable, EvalError> {
        evaluate_model(params, &self.test, &self.standardizer)
    }
}
