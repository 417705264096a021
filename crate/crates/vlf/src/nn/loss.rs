use super::NnError;

/// Batch RMSE over both output dimensions:
/// sqrt(mean of squared errors over batch * 2 dims).
pub fn rmse_loss(preds: &[[f64; 2]], labels: &[[f64; 2]]) -> Result<f64, NnError> {
    if preds.is_empty() {
        return Err(NnError::EmptySet("loss"));
    }
    if preds.len() != labels.len() {
        return Err(NnError::DimMismatch(format!(
            "{} predictions vs {} labels",
            preds.len(),
            labels.len()
        )));
    }
    let mut sumsq = 0.0;
    for (p, t) in preds.iter().zip(labels.iter()) {
        let e0 = p[0] - t[0];
        let e1 = p[1] - t[1];
        sumsq += e0 * e0 + e1 * e1;
    }
    Ok((sumsq / (2.0 * preds.len() as f64)).sqrt())
}
