use super::FedError;
use crate::nn::ModelParams;

/// Sample-count-weighted mean of parameter updates.
///
/// The result is invariant under permutation of the inputs and exactly
/// reproduces a single surviving update: zero-weight updates are dropped
/// up front, one remaining update is returned as-is, and each coordinate
/// is summed as pivot + sum of sorted weighted offsets from the pivot, so
/// reordering silos cannot change even the last bit. Identical updates
/// aggregate to themselves because every offset is exactly zero.
pub fn aggregate(updates: &[(ModelParams, u64)]) -> Result<ModelParams, FedError> {
    if updates.is_empty() {
        return Err(FedError::NoUpdates);
    }
    let dims = updates[0].0.dims;
    for (p, _) in updates {
        if p.dims != dims {
            return Err(FedError::DimMismatch(format!(
                "expected {:?}, got {:?}",
                dims, p.dims
            )));
        }
    }
    let active: Vec<&(ModelParams, u64)> = updates.iter().filter(|(_, c)| *c > 0).collect();
    if active.is_empty() {
        return Err(FedError::ZeroWeights);
    }
    if active.len() == 1 {
        return Ok(active[0].0.clone());
    }
    let total: u128 = active.iter().map(|(_, c)| *c as u128).sum();
    let weights: Vec<f64> = active
        .iter()
        .map(|(_, c)| *c as f64 / total as f64)
        .collect();

    let blocks: Vec<Vec<&[f64]>> = active.iter().map(|(p, _)| p.block_slices()).collect();
    let mut out = ModelParams::zeros(dims);
    let mut terms: Vec<f64> = vec![0.0; active.len()];
    for (bi, out_block) in out.block_slices_mut().into_iter().enumerate() {
        for (k, slot) in out_block.iter_mut().enumerate() {
            let mut pivot = f64::INFINITY;
            for b in &blocks {
                let v = b[bi][k];
                if v.total_cmp(&pivot).is_lt() {
                    pivot = v;
                }
            }
            for (si, b) in blocks.iter().enumerate() {
                terms[si] = (b[bi][k] - pivot) * weights[si];
            }
            terms.sort_by(|a, b| a.total_cmp(b));
            *slot = pivot + terms.iter().sum::<f64>();
        }
    }
    Ok(out)
}
