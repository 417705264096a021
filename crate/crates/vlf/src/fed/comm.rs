use super::FedError;
use serde::{Deserialize, Serialize};

const GIB: f64 = (1u64 << 30) as f64;

/// Byte totals for moving the same training job through a central
/// collector versus keeping data in place and shipping parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommCostReport {
    pub centralized_bytes: u128,
    pub federated_bytes: u128,
    /// 1 - federated/centralized, in [0, 1] when federation is cheaper.
    pub reduction: f64,
}

impl CommCostReport {
    pub fn centralized_gib(&self) -> f64 {
        self.centralized_bytes as f64 / GIB
    }

    pub fn federated_gib(&self) -> f64 {
        self.federated_bytes as f64 / GIB
    }

    pub fn reduction_percent(&self) -> f64 {
        self.reduction * 100.0
    }
}

/// Centralized cost: ship every silo's raw data once, then exchange one
/// coordination message per silo per epoch. Federated cost: two parameter
/// transfers (broadcast + update) per silo per round. `rounds_or_epochs`
/// plays both roles so the two schedules are compared over the same
/// number of passes.
pub fn comm_cost(
    dataset_bytes: u64,
    model_msg_bytes: u64,
    param_bytes: u64,
    n_silos: u64,
    rounds_or_epochs: u64,
) -> Result<CommCostReport, FedError> {
    let n = n_silos as u128;
    let r = rounds_or_epochs as u128;
    let centralized = (model_msg_bytes as u128)
        .checked_mul(n)
        .and_then(|v| v.checked_mul(r))
        .and_then(|v| v.checked_add(dataset_bytes as u128))
        .ok_or(FedError::Overflow)?;
    let federated = (param_bytes as u128)
        .checked_mul(2 * n)
        .and_then(|v| v.checked_mul(r))
        .ok_or(FedError::Overflow)?;
    if centralized == 0 {
        return Err(FedError::ZeroCentralized);
    }
    let reduction = 1.0 - federated as f64 / centralized as f64;
    Ok(CommCostReport {
        centralized_bytes: centralized,
        federated_bytes: federated,
        reduction,
    })
}
