use super::{aggregate, FedConfig, FedError, SiloHandle};
use crate::nn::{l2_distance, serialized_len, ModelDims, ModelParams, NnError};
use rayon::prelude::*;

/// What one silo reported in one round. Losses and drift are `None` when
/// the silo diverged (its update is excluded from aggregation that round).
#[derive(Debug, Clone, PartialEq)]
pub struct SiloRoundStats {
    pub silo_id: String,
    pub sample_count: u64,
    pub train_loss: Option<f64>,
    pub val_loss: Option<f64>,
    pub drift: Option<f64>,
    pub diverged: bool,
}

/// One round of the federation: per-silo stats, the aggregated model's
/// pooled validation loss, and cumulative traffic. `bytes_sent` counts
/// coordinator-to-silo broadcasts (all silos), `bytes_received` counts
/// updates actually returned (diverged silos return nothing).
#[derive(Debug, Clone, PartialEq)]
pub struct RoundLog {
    pub round: usize,
    pub silos: Vec<SiloRoundStats>,
    pub global_val_loss: f64,
    pub bytes_sent: u64,
    pub bytes_received: u64,
}

#[derive(Debug, Clone)]
pub struct FederationOutcome {
    pub global: ModelParams,
    pub rounds: Vec<RoundLog>,
}

/// Runs the full federation schedule: per round, broadcast the global
/// parameters, train every silo locally in parallel, exclude silos whose
/// training diverged, aggregate the rest weighted by sample count, and
/// evaluate the new global model on the pooled validation data. Silos are
/// processed in silo-id order regardless of input order, so the result is
/// byte-identical for any permutation of `silos`.
pub fn run_federation(
    silos: &[SiloHandle],
    dims: ModelDims,
    cfg: &FedConfig,
    seed: u64,
) -> Result<FederationOutcome, FedError> {
    cfg.validate()?;
    dims.validate()?;
    if silos.is_empty() {
        return Err(FedError::NoSilos);
    }
    if silos.len() < 2 {
        return Err(FedError::TooFewSilos(silos.len()));
    }
    let mut order: Vec<usize> = (0..silos.len()).collect();
    order.sort_by(|&a, &b| silos[a].id().cmp(silos[b].id()));
    for pair in order.windows(2) {
        if silos[pair[0]].id() == silos[pair[1]].id() {
            return Err(FedError::DuplicateSiloId(silos[pair[0]].id().to_string()));
        }
    }

    let mu = cfg.effective_mu();
    let msg_bytes = serialized_len(&dims) as u64;
    let mut global = ModelParams::init(dims, seed);
    let mut rounds = Vec::with_capacity(cfg.rounds);
    let mut bytes_sent = 0u64;
    let mut bytes_received = 0u64;

    for round in 1..=cfg.rounds {
        bytes_sent += msg_bytes * silos.len() as u64;
        let results: Vec<_> = order
            .par_iter()
            .map(|&i| {
                let silo = &silos[i];
                (
                    i,
                    silo.local_train(&global, cfg.local_epochs, mu, &cfg.train),
                )
            })
            .collect();

        let mut stats = Vec::with_capacity(silos.len());
        let mut updates: Vec<(ModelParams, u64)> = Vec::with_capacity(silos.len());
        for (i, res) in results {
            let silo = &silos[i];
            match res {
                Ok((params, losses)) => {
                    bytes_received += msg_bytes;
                    let drift = l2_distance(&params, &global)?;
                    stats.push(SiloRoundStats {
                        silo_id: silo.id().to_string(),
                        sample_count: silo.sample_count() as u64,
                        train_loss: losses.train.last().copied(),
                        val_loss: Some(losses.val),
                        drift: Some(drift),
                        diverged: false,
                    });
                    updates.push((params, silo.sample_count() as u64));
                }
                Err(NnError::Diverged { .. }) => {
                    stats.push(SiloRoundStats {
                        silo_id: silo.id().to_string(),
                        sample_count: silo.sample_count() as u64,
                        train_loss: None,
                        val_loss: None,
                        drift: None,
                        diverged: true,
                    });
                }
                Err(other) => return Err(other.into()),
            }
        }
        if updates.is_empty() {
            return Err(FedError::AllDiverged { round });
        }
        global = aggregate(&updates)?;

        let mut sumsq = 0.0;
        let mut n = 0usize;
        for silo in silos {
            let (s, c) = silo.val_sumsq(&global)?;
            sumsq += s;
            n += c;
        }
        let global_val_loss = (sumsq / (2.0 * n as f64)).sqrt();

        rounds.push(RoundLog {
            round,
            silos: stats,
            global_val_loss,
            bytes_sent,
            bytes_received,
        });
    }

    Ok(FederationOutcome { global, rounds })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// CSV log: one row per silo per round plus an `aggregate` row carrying
/// the pooled validation loss and cumulative byte counters.
pub fn round_log_csv(rounds: &[RoundLog]) -> String {
    let mut out = String::from(
        "round,scope,samples,train_loss,val_loss,drift,diverged,global_val_loss,bytes_sent,bytes_received\n",
    );
    for r in rounds {
        let mut samples_total = 0u64;
        for s in &r.silos {
            if !s.diverged {
                samples_total += s.sample_count;
            }
            out.push_str(&format!(
                "{},{},{},{},{},{},{},,,\n",
                r.round,
                s.silo_id,
                s.sample_count,
                fmt_opt(s.train_loss),
                fmt_opt(s.val_loss),
                fmt_opt(s.drift),
                s.diverged,
            ));
        }
        out.push_str(&format!(
            "{},aggregate,{},,,,,{},{},{}\n",
            r.round, samples_total, r.global_val_loss, r.bytes_sent, r.bytes_received,
        ));
    }
    out
}
