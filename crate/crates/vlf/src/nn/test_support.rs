//! Shared fixtures for the nn tests: tiny shapes, random windows, and a
//! central-finite-difference gradient checker with mask replay.

use super::backward::backward;
use super::forward::{model_forward, ForwardCache, ForwardMode};
use super::params::{ModelDims, ModelParams};
use crate::features::{StepFeature, TrainingWindow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub(crate) fn tiny_dims() -> ModelDims {
    ModelDims {
        input: 6,
        hidden: 8,
        embed: 3,
        dense: 4,
        output: 2,
        vocab: 3,
    }
}

pub(crate) fn window(len: usize, vessel_type: u32, seed: u64) -> TrainingWindow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    TrainingWindow {
        vessel_type,
        steps: (0..len)
            .map(|_| {
                StepFeature::from_array([
                    rng.gen_range(-1.5..1.5),
                    rng.gen_range(-1.5..1.5),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ])
            })
            .collect(),
        label: [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
        horizon_s: 300.0,
        t_final: 0,
    }
}

pub(crate) fn window_batch(n: usize, len: usize, vocab: u32, seed0: u64) -> Vec<TrainingWindow> {
    (0..n)
        .map(|i| window(len, (i as u32) % vocab, seed0 + i as u64))
        .collect()
}

/// Forwards every window in train mode drawing dropout masks from `rng`.
/// Reseeding the RNG identically replays the exact same masks.
pub(crate) fn forward_batch_seeded(
    windows: &[TrainingWindow],
    params: &ModelParams,
    dropout_p: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<ForwardCache> {
    windows
        .iter()
        .map(|w| {
            model_forward(w, params, ForwardMode::Train { dropout_p, rng })
                .unwrap()
                .1
        })
        .collect()
}

pub(crate) fn loss_of_batch(caches: &[ForwardCache], windows: &[TrainingWindow]) -> f64 {
    let mut sumsq = 0.0;
    for (c, w) in caches.iter().zip(windows.iter()) {
        let e0 = c.pred[0] - w.label[0];
        let e1 = c.pred[1] - w.label[1];
        sumsq += e0 * e0 + e1 * e1;
    }
    (sumsq / (2.0 * windows.len() as f64)).sqrt()
}

/// Central finite differences against the analytic gradients, parameter by
/// parameter, with the dropout mask stream pinned by a fixed RNG seed.
/// Returns (total params, params checked, max relative error), where the
/// relative error divides by max(|analytic|, |fd|, 1e-6).
pub(crate) fn fd_gradients(
    params: &ModelParams,
    windows: &[TrainingWindow],
    dropout_p: f64,
    eps: f64,
) -> (usize, usize, f64) {
    const MASK_SEED: u64 = 0xFEED_5EED;
    let loss_at = |p: &ModelParams| -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(MASK_SEED);
        let caches = forward_batch_seeded(windows, p, dropout_p, &mut rng);
        loss_of_batch(&caches, windows)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(MASK_SEED);
    let caches = forward_batch_seeded(windows, params, dropout_p, &mut rng);
    let (_, grads) = backward(windows, params, &caches).unwrap();

    let total = params.param_count();
    let mut checked = 0usize;
    let mut max_rel = 0.0f64;
    let mut work = params.clone();
    let n_blocks = work.block_slices().len();
    for bi in 0..n_blocks {
        let len = work.block_slices()[bi].len();
        for k in 0..len {
            let orig = work.block_slices()[bi][k];
            let hi = orig + eps;
            let lo = orig - eps;
            work.block_slices_mut()[bi][k] = hi;
            let lp = loss_at(&work);
            work.block_slices_mut()[bi][k] = lo;
            let lm = loss_at(&work);
            work.block_slices_mut()[bi][k] = orig;
            let fd = (lp - lm) / (hi - lo);
            let a = grads.block_slices()[bi][k];
            let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-6);
            if rel > max_rel {
                max_rel = rel;
            }
            checked += 1;
        }
    }
    (total, checked, max_rel)
}
