use super::forward::ForwardCache;
use super::lstm::{GATE_F, GATE_G, GATE_I, GATE_O};
use super::params::ModelParams;
use super::NnError;
use crate::features::TrainingWindow;

/// Analytic gradients of the batch RMSE with respect to every parameter,
/// backpropagated through the head and through time. Consumes the caches
/// produced by `model_forward` on the same windows in the same order.
/// Returns the batch loss alongside the gradients; a zero-error batch
/// yields zero gradients.
pub fn backward<W: std::borrow::Borrow<TrainingWindow>>(
    windows: &[W],
    params: &ModelParams,
    caches: &[ForwardCache],
) -> Result<(f64, ModelParams), NnError> {
    if windows.is_empty() {
        return Err(NnError::EmptySet("batch"));
    }
    if windows.len() != caches.len() {
        return Err(NnError::DimMismatch(format!(
            "{} windows vs {} caches",
            windows.len(),
            caches.len()
        )));
    }
    let n = windows.len() as f64;
    let mut sumsq = 0.0;
    for (w, c) in windows.iter().zip(caches.iter()) {
        let w = w.borrow();
        let e0 = c.pred[0] - w.label[0];
        let e1 = c.pred[1] - w.label[1];
        sumsq += e0 * e0 + e1 * e1;
    }
    let loss = (sumsq / (2.0 * n)).sqrt();
    let mut grads = ModelParams::zeros(params.dims);
    if loss == 0.0 {
        return Ok((loss, grads));
    }

    let hidden = params.dims.hidden;
    for (w, cache) in windows.iter().zip(caches.iter()) {
        let w = w.borrow();
        // d loss / d pred for batch RMSE
        let dy = [
            (cache.pred[0] - w.label[0]) / (2.0 * n * loss),
            (cache.pred[1] - w.label[1]) / (2.0 * n * loss),
        ];

        // output layer
        grads.out_w.add_outer(&dy, &cache.dense_act);
        for (gb, d) in grads.out_b.iter_mut().zip(dy.iter()) {
            *gb += d;
        }
        let mut d_dense = vec![0.0; params.dims.dense];
        params.out_w.tr_matvec_acc(&dy, &mut d_dense);

        // ReLU
        for (d, pre) in d_dense.iter_mut().zip(cache.dense_pre.iter()) {
            if *pre <= 0.0 {
                *d = 0.0;
            }
        }

        // dense layer
        grads.dense_w.add_outer(&d_dense, &cache.dense_in);
        for (gb, d) in grads.dense_b.iter_mut().zip(d_dense.iter()) {
            *gb += d;
        }
        let mut d_concat = vec![0.0; hidden + params.dims.embed];
        params.dense_w.tr_matvec_acc(&d_dense, &mut d_concat);

        // dropout: replay the mask and its inverted scaling
        if let Some((mask, keep)) = &cache.mask {
            for (d, &m) in d_concat.iter_mut().zip(mask.iter()) {
                *d = if m { *d / keep } else { 0.0 };
            }
        }

        // split into hidden-state and embedding gradients
        let mut dh: Vec<f64> = d_concat[..hidden].to_vec();
        let emb_row = cache.vessel_type as usize;
        for (k, d) in d_concat[hidden..].iter().enumerate() {
            *grads.embedding.at_mut(emb_row, k) += d;
        }

        // back through time
        let mut dc = vec![0.0; hidden];
        for t in (0..cache.steps.len()).rev() {
            let step = &cache.steps[t];
            let (h_prev, c_prev): (&[f64], &[f64]) = if t == 0 {
                (&[], &[])
            } else {
                (&cache.steps[t - 1].h, &cache.steps[t - 1].c)
            };
            let acts = &step.gates;

            let mut dzf = vec![0.0; hidden];
            let mut dzi = vec![0.0; hidden];
            let mut dzo = vec![0.0; hidden];
            let mut dzg = vec![0.0; hidden];
            for j in 0..hidden {
                let tanh_c = step.c[j].tanh();
                let o = acts.o[j];
                dzo[j] = dh[j] * tanh_c * o * (1.0 - o);
                dc[j] += dh[j] * o * (1.0 - tanh_c * tanh_c);

                let cp = if t == 0 { 0.0 } else { c_prev[j] };
                let f = acts.f[j];
                let i = acts.i[j];
                let g = acts.g[j];
                dzf[j] = dc[j] * cp * f * (1.0 - f);
                dzi[j] = dc[j] * g * i * (1.0 - i);
                dzg[j] = dc[j] * i * (1.0 - g * g);
            }

            let mut dh_prev = vec![0.0; hidden];
            for (gi, dz) in [(GATE_F, &dzf), (GATE_I, &dzi), (GATE_O, &dzo), (GATE_G, &dzg)] {
                grads.gates[gi].w.add_outer(dz, &step.x);
                if t > 0 {
                    grads.gates[gi].r.add_outer(dz, h_prev);
                }
                for (gb, d) in grads.gates[gi].b.iter_mut().zip(dz.iter()) {
                    *gb += d;
                }
                params.gates[gi].r.tr_matvec_acc(dz, &mut dh_prev);
            }

            for j in 0..hidden {
                dc[j] *= acts.f[j];
            }
            dh = dh_prev;
        }
    }
    Ok((loss, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::forward::{model_forward, ForwardMode};
    use crate::nn::test_support::{
        fd_gradients, forward_batch_seeded, loss_of_batch, tiny_dims, window_batch,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn windows(n: usize, len: usize) -> Vec<TrainingWindow> {
        window_batch(n, len, 3, 40)
    }

    #[test]
    fn zero_error_batch_gives_zero_gradients() {
        let p = ModelParams::init(tiny_dims(), 11);
        let mut ws = windows(3, 4);
        for w in &mut ws {
            let (pred, _) = model_forward(w, &p, ForwardMode::Eval).unwrap();
            w.label = pred;
        }
        let caches: Vec<ForwardCache> = ws
            .iter()
            .map(|w| model_forward(w, &p, ForwardMode::Eval).unwrap().1)
            .collect();
        let (loss, grads) = backward(&ws, &p, &caches).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grads
            .block_slices()
            .iter()
            .all(|b| b.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn unused_embedding_rows_get_zero_gradient() {
        let p = ModelParams::init(tiny_dims(), 11);
        let mut ws = windows(4, 3);
        for w in &mut ws {
            w.vessel_type = 1; // only row 1 is touched
        }
        let caches: Vec<ForwardCache> = ws
            .iter()
            .map(|w| model_forward(w, &p, ForwardMode::Eval).unwrap().1)
            .collect();
        let (_, grads) = backward(&ws, &p, &caches).unwrap();
        assert!(grads.embedding.row(0).iter().all(|v| *v == 0.0));
        assert!(grads.embedding.row(2).iter().all(|v| *v == 0.0));
        assert!(grads.embedding.row(1).iter().any(|v| *v != 0.0));
    }

    #[test]
    fn gradients_match_finite_differences_without_dropout() {
        let p = ModelParams::init(tiny_dims(), 17);
        let ws = windows(5, 3);
        let (analytic, checked, max_rel) = fd_gradients(&p, &ws, 0.0, 1e-5);
        assert_eq!(checked, analytic, "all {analytic} parameters checked");
        assert!(max_rel < 1e-4, "max relative error {max_rel}");
    }

    #[test]
    fn gradients_match_finite_differences_with_dropout_mask_replayed() {
        let p = ModelParams::init(tiny_dims(), 23);
        let ws = windows(5, 3);
        let (analytic, checked, max_rel) = fd_gradients(&p, &ws, 0.25, 1e-5);
        assert_eq!(checked, analytic);
        assert!(max_rel < 1e-4, "max relative error {max_rel}");
    }

    #[test]
    fn backward_loss_equals_forward_loss() {
        let p = ModelParams::init(tiny_dims(), 31);
        let ws = windows(6, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let caches = forward_batch_seeded(&ws, &p, 0.25, &mut rng);
        let (loss, _) = backward(&ws, &p, &caches).unwrap();
        let direct = loss_of_batch(&caches, &ws);
        assert!((loss - direct).abs() < 1e-15);
    }
}
