use super::lstm::{lstm_cell_forward, GateActs, LstmState};
use super::params::ModelParams;
use super::NnError;
use crate::features::{TrainingWindow, N_FEATURES};
use rand::RngCore;

/// Eval mode is deterministic; train mode applies inverted dropout to the
/// concatenated (hidden ++ embedding) vector using the supplied RNG.
pub enum ForwardMode<'a> {
    Eval,
    Train {
        dropout_p: f64,
        rng: &'a mut dyn RngCore,
    },
}

#[derive(Debug, Clone)]
pub struct StepCache {
    pub x: [f64; N_FEATURES],
    pub gates: GateActs,
    pub c: Vec<f64>,
    pub h: Vec<f64>,
}

/// Every intermediate needed to backpropagate one window.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub steps: Vec<StepCache>,
    pub vessel_type: u32,
    /// hidden ++ embedding before dropout
    pub concat: Vec<f64>,
    /// dropout keep mask and keep probability; None in eval mode or p = 0
    pub mask: Option<(Vec<bool>, f64)>,
    /// dense-layer input after dropout scaling
    pub dense_in: Vec<f64>,
    pub dense_pre: Vec<f64>,
    pub dense_act: Vec<f64>,
    pub pred: [f64; 2],
}

/// Runs the model over one window and returns the standardized (dx, dy)
/// prediction plus the cache for backpropagation.
pub fn model_forward(
    window: &TrainingWindow,
    params: &ModelParams,
    mode: ForwardMode,
) -> Result<([f64; 2], ForwardCache), NnError> {
    let dims = &params.dims;
    if dims.input != N_FEATURES {
        return Err(NnError::DimMismatch(format!(
            "model expects input width {}, features provide {}",
            dims.input, N_FEATURES
        )));
    }
    if dims.output != 2 {
        return Err(NnError::DimMismatch(format!(
            "model output width {} is not 2",
            dims.output
        )));
    }
    if window.is_empty() {
        return Err(NnError::EmptyWindow);
    }
    if (window.vessel_type as usize) >= dims.vocab {
        return Err(NnError::Vocab {
            vessel_type: window.vessel_type,
            vocab: dims.vocab,
        });
    }

    let mut state = LstmState::zeros(dims.hidden);
    let mut steps = Vec::with_capacity(window.len());
    for s in &window.steps {
        let x = s.as_array();
        let (next, gates) = lstm_cell_forward(&x, &state, params);
        steps.push(StepCache {
            x,
            gates,
            c: next.c.clone(),
            h: next.h.clone(),
        });
        state = next;
    }

    let mut concat = Vec::with_capacity(dims.hidden + dims.embed);
    concat.extend_from_slice(&state.h);
    concat.extend_from_slice(params.embedding.row(window.vessel_type as usize));

    let (dense_in, mask) = match mode {
        ForwardMode::Eval => (concat.clone(), None),
        ForwardMode::Train { dropout_p, rng } => {
            if !(0.0..1.0).contains(&dropout_p) {
                return Err(NnError::BadConfig(format!(
                    "dropout_p {dropout_p} outside [0, 1)"
                )));
            }
            if dropout_p == 0.0 {
                (concat.clone(), None)
            } else {
                let keep = 1.0 - dropout_p;
                let mask: Vec<bool> = (0..concat.len())
                    .map(|_| (rng.next_u64() as f64 / u64::MAX as f64) < keep)
                    .collect();
                let dense_in = concat
                    .iter()
                    .zip(mask.iter())
                    .map(|(v, &m)| if m { v / keep } else { 0.0 })
                    .collect();
                (dense_in, Some((mask, keep)))
            }
        }
    };

    let mut dense_pre = params.dense_b.clone();
    params.dense_w.matvec_acc(&dense_in, &mut dense_pre);
    // NB: not `v.max(0.0)` — f64::max ignores NaN, which would hide a
    // poisoned activation from divergence detection downstream.
    let dense_act: Vec<f64> = dense_pre
        .iter()
        .map(|&v| if v > 0.0 || v.is_nan() { v } else { 0.0 })
        .collect();

    let mut out = params.out_b.clone();
    params.out_w.matvec_acc(&dense_act, &mut out);
    let pred = [out[0], out[1]];

    Ok((
        pred,
        ForwardCache {
            steps,
            vessel_type: window.vessel_type,
            concat,
            mask,
            dense_in,
            dense_pre,
            dense_act,
            pred,
        },
    ))
}
