use super::EvalError;
use crate::features::{Standardizer, TrainingWindow};
use crate::nn::{model_forward, ForwardMode, ModelParams};

pub const N_BUCKETS: usize = 12;
pub const BUCKET_WIDTH_S: f64 = 300.0;
pub const MAX_HORIZON_S: f64 = BUCKET_WIDTH_S * N_BUCKETS as f64;

/// One scored prediction, in meters, with the lead time it was made at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionSample {
    pub pred: [f64; 2],
    pub truth: [f64; 2],
    pub horizon_s: f64,
}

pub fn displacement(s: &PredictionSample) -> f64 {
    (s.pred[0] - s.truth[0]).hypot(s.pred[1] - s.truth[1])
}

/// Final displacement error: mean Euclidean distance between predicted
/// and true endpoints.
pub fn fde(samples: &[PredictionSample]) -> Result<f64, EvalError> {
    if samples.is_empty() {
        return Err(EvalError::Empty);
    }
    let sum: f64 = samples.iter().map(displacement).sum();
    Ok(sum / samples.len() as f64)
}

/// Maps a horizon to its five-minute bucket. Buckets are right-closed:
/// bucket k covers (300k, 300(k+1)] seconds, so a horizon of exactly
/// 300 s lands in the first bucket and 3600 s in the last.
pub fn bucket_index(horizon_s: f64) -> Result<usize, EvalError> {
    if !(horizon_s > 0.0 && horizon_s <= MAX_HORIZON_S) {
        return Err(EvalError::BadHorizon(horizon_s));
    }
    Ok((horizon_s / BUCKET_WIDTH_S).ceil() as usize - 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BucketStat {
    pub n: usize,
    pub fde: f64,
}

/// Displacement error split by prediction horizon; buckets nobody fell
/// into are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct FdeBucketTable {
    pub buckets: [Option<BucketStat>; N_BUCKETS],
}

impl FdeBucketTable {
    /// Mean displacement over every scored sample, all horizons pooled.
    pub fn overall(&self) -> Option<f64> {
        let mut sum = 0.0;
        let mut n = 0usize;
        for b in self.buckets.iter().flatten() {
            sum += b.fde * b.n as f64;
            n += b.n;
        }
        (n > 0).then(|| sum / n as f64)
    }

    pub fn total_samples(&self) -> usize {
        self.buckets.iter().flatten().map(|b| b.n).sum()
    }
}

pub fn bucket_by_horizon(samples: &[PredictionSample]) -> Result<FdeBucketTable, EvalError> {
    if samples.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut sums = [0.0f64; N_BUCKETS];
    let mut counts = [0usize; N_BUCKETS];
    for s in samples {
        let k = bucket_index(s.horizon_s)?;
        sums[k] += displacement(s);
        counts[k] += 1;
    }
    let mut buckets = [None; N_BUCKETS];
    for k in 0..N_BUCKETS {
        if counts[k] > 0 {
            buckets[k] = Some(BucketStat {
                n: counts[k],
                fde: sums[k] / counts[k] as f64,
            });
        }
    }
    Ok(FdeBucketTable { buckets })
}

/// Scores an arbitrary predictor over standardized windows. The predictor
/// returns standardized (dx, dy); both prediction and label are mapped
/// back to meters through the standardizer before the error is taken.
pub fn evaluate_with<F>(
    windows: &[TrainingWindow],
    standardizer: &Standardizer,
    mut predictor: F,
) -> Result<FdeBucketTable, EvalError>
where
    F: FnMut(&TrainingWindow) -> Result<[f64; 2], EvalError>,
{
    if windows.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut samples = Vec::with_capacity(windows.len());
    for w in windows {
        let pred = predictor(w)?;
        samples.push(PredictionSample {
            pred: standardizer.destandardize_label(pred),
            truth: standardizer.destandardize_label(w.label),
            horizon_s: w.horizon_s,
        });
    }
    bucket_by_horizon(&samples)
}

/// Scores the model on standardized windows, reporting meters by horizon.
pub fn evaluate_model(
    params: &ModelParams,
    windows: &[TrainingWindow],
    standardizer: &Standardizer,
) -> Result<FdeBucketTable, EvalError> {
    evaluate_with(windows, standardizer, |w| {
        let (pred, _) = model_forward(w, params, ForwardMode::Eval)?;
        Ok(pred)
    })
}

fn bucket_bounds(k: usize) -> (f64, f64) {
    (BUCKET_WIDTH_S * k as f64, BUCKET_WIDTH_S * (k + 1) as f64)
}

pub fn table_csv(table: &FdeBucketTable) -> String {
    let mut out = String::from("bucket_start_s,bucket_end_s,n,fde_m\n");
    for (k, b) in table.buckets.iter().enumerate() {
        let (lo, hi) = bucket_bounds(k);
        match b {
            Some(s) => out.push_str(&format!("{lo},{hi},{},{}\n", s.n, s.fde)),
            None => out.push_str(&format!("{lo},{hi},0,\n")),
        }
    }
    out
}

pub fn table_markdown(table: &FdeBucketTable) -> String {
    let mut out = String::from("| horizon | n | FDE (m) |\n|---|---|---|\n");
    for (k, b) in table.buckets.iter().enumerate() {
        let (lo, hi) = bucket_bounds(k);
        let label = format!("({:.0}, {:.0}] min", lo / 60.0, hi / 60.0);
        match b {
            Some(s) => out.push_str(&format!("| {label} | {} | {:.1} |\n", s.n, s.fde)),
            None => out.push_str(&format!("| {label} | 0 | n/a |\n")),
        }
    }
    if let Some(all) = table.overall() {
        out.push_str(&format!(
            "| all | {} | {:.1} |\n",
            table.total_samples(),
            all
        ));
    }
    out
}
