use super::params::ModelParams;
use super::NnError;
use serde::{Deserialize, Serialize};

/// Adam hyperparameters; defaults are the usual 0.9 / 0.999 / 1e-8 with
/// the production learning rate of 1e-4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        AdamHyper {
            lr: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates, flattened over the canonical block
/// order, plus the step counter for bias correction.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(param_count: usize) -> Self {
        AdamState {
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            step: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }
}

/// The bias-corrected Adam update on flat slices:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
///   p <- p - lr * (m/(1-b1^t)) / (sqrt(v/(1-b2^t)) + eps)
pub fn adam_update_flat(
    p: &mut [f64],
    g: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    t: u64,
    hyper: &AdamHyper,
) {
    let bc1 = 1.0 - hyper.beta1.powi(t as i32);
    let bc2 = 1.0 - hyper.beta2.powi(t as i32);
    for idx in 0..p.len() {
        let gi = g[idx];
        m[idx] = hyper.beta1 * m[idx] + (1.0 - hyper.beta1) * gi;
        v[idx] = hyper.beta2 * v[idx] + (1.0 - hyper.beta2) * gi * gi;
        let m_hat = m[idx] / bc1;
        let v_hat = v[idx] / bc2;
        p[idx] -= hyper.lr * m_hat / (v_hat.sqrt() + hyper.eps);
    }
}

/// Applies one Adam step to the whole parameter set.
pub fn adam_step(
    params: &mut ModelParams,
    grads: &ModelParams,
    state: &mut AdamState,
    hyper: &AdamHyper,
) -> Result<(), NnError> {
    if !params.same_dims(grads) {
        return Err(NnError::DimMismatch(
            "gradient shape differs from parameter shape".into(),
        ));
    }
    if state.len() != params.param_count() {
        return Err(NnError::DimMismatch(format!(
            "optimizer state holds {} entries for {} parameters",
            state.len(),
            params.param_count()
        )));
    }
    state.step += 1;
    let t = state.step;
    let mut offset = 0;
    let g_blocks = grads.block_slices();
    for (bi, p_block) in params.block_slices_mut().into_iter().enumerate() {
        let len = p_block.len();
        adam_update_flat(
            p_block,
            g_blocks[bi],
            &mut state.m[offset..offset + len],
            &mut state.v[offset..offset + len],
            t,
            hyper,
        );
        offset += len;
    }
    Ok(())
}
