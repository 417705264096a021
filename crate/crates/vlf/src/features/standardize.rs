use super::{FeatureError, StepFeature, TrainingWindow, N_FEATURES, N_LABEL};
use serde::{Deserialize, Serialize};

pub const FEATURE_NAMES: [&str; N_FEATURES + N_LABEL] =
    ["dx", "dy", "dv", "dphi", "dt_curr", "dt_next", "label_dx", "label_dy"];

const MIN_SCALE: f64 = 1e-12;

/// Per-feature z-score parameters: six input features fitted over every
/// step of the fit set, two label features fitted over the labels.
/// Scale is the population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub feature_mean: [f64; N_FEATURES],
    pub feature_scale: [f64; N_FEATURES],
    pub label_mean: [f64; N_LABEL],
    pub label_scale: [f64; N_LABEL],
}

/// Fits means and scales on the given windows (call with the training
/// split only). Errors if any feature is constant.
pub fn fit_standardizer(windows: &[TrainingWindow]) -> Result<Standardizer, FeatureError> {
    if windows.is_empty() {
        return Err(FeatureError::Empty);
    }
    let mut sum = [0.0f64; N_FEATURES];
    let mut sumsq = [0.0f64; N_FEATURES];
    let mut n_steps = 0u64;
    let mut lsum = [0.0f64; N_LABEL];
    let mut lsumsq = [0.0f64; N_LABEL];
    for w in windows {
        for s in &w.steps {
            for (k, v) in s.as_array().into_iter().enumerate() {
                sum[k] += v;
                sumsq[k] += v * v;
            }
        }
        n_steps += w.len() as u64;
        for k in 0..N_LABEL {
            lsum[k] += w.label[k];
            lsumsq[k] += w.label[k] * w.label[k];
        }
    }
    let n = n_steps as f64;
    let m = windows.len() as f64;

    let mut out = Standardizer {
        feature_mean: [0.0; N_FEATURES],
        feature_scale: [0.0; N_FEATURES],
        label_mean: [0.0; N_LABEL],
        label_scale: [0.0; N_LABEL],
    };
    for k in 0..N_FEATURES {
        let mean = sum[k] / n;
        let var = (sumsq[k] / n - mean * mean).max(0.0);
        let scale = var.sqrt();
        if scale < MIN_SCALE {
            return Err(FeatureError::DegenerateFeature(FEATURE_NAMES[k]));
        }
        out.feature_mean[k] = mean;
        out.feature_scale[k] = scale;
    }
    for k in 0..N_LABEL {
        let mean = lsum[k] / m;
        let var = (lsumsq[k] / m - mean * mean).max(0.0);
        let scale = var.sqrt();
        if scale < MIN_SCALE {
            return Err(FeatureError::DegenerateFeature(FEATURE_NAMES[N_FEATURES + k]));
        }
        out.label_mean[k] = mean;
        out.label_scale[k] = scale;
    }
    Ok(out)
}

impl Standardizer {
    /// Zero-mean unit-scale standardizer: `apply` and `invert` become
    /// identities. Useful when windows are already in model units.
    pub fn identity() -> Self {
        Standardizer {
            feature_mean: [0.0; N_FEATURES],
            feature_scale: [1.0; N_FEATURES],
            label_mean: [0.0; N_LABEL],
            label_scale: [1.0; N_LABEL],
        }
    }

    /// Standardizes step features and label; horizon and timestamp pass
    /// through untouched.
    pub fn apply(&self, w: &TrainingWindow) -> TrainingWindow {
        let steps = w
            .steps
            .iter()
            .map(|s| {
                let mut a = s.as_array();
                for k in 0..N_FEATURES {
                    a[k] = (a[k] - self.feature_mean[k]) / self.feature_scale[k];
                }
                StepFeature::from_array(a)
            })
            .collect();
        let mut label = w.label;
        for k in 0..N_LABEL {
            label[k] = (label[k] - self.label_mean[k]) / self.label_scale[k];
        }
        TrainingWindow {
            vessel_type: w.vessel_type,
            steps,
            label,
            horizon_s: w.horizon_s,
            t_final: w.t_final,
        }
    }

    pub fn invert(&self, w: &TrainingWindow) -> TrainingWindow {
        let steps = w
            .steps
            .iter()
            .map(|s| {
                let mut a = s.as_array();
                for k in 0..N_FEATURES {
                    a[k] = a[k] * self.feature_scale[k] + self.feature_mean[k];
                }
                StepFeature::from_array(a)
            })
            .collect();
        let mut label = w.label;
        for k in 0..N_LABEL {
            label[k] = label[k] * self.label_scale[k] + self.label_mean[k];
        }
        TrainingWindow {
            vessel_type: w.vessel_type,
            steps,
            label,
            horizon_s: w.horizon_s,
            t_final: w.t_final,
        }
    }

    /// Maps a standardized (dx, dy) prediction back to meters.
    pub fn destandardize_label(&self, z: [f64; N_LABEL]) -> [f64; N_LABEL] {
        [
            z[0] * self.label_scale[0] + self.label_mean[0],
            z[1] * self.label_scale[1] + self.label_mean[1],
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_windows(n: usize, seed: u64) -> Vec<TrainingWindow> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let len = rng.gen_range(3..8);
                TrainingWindow {
                    vessel_type: 0,
                    steps: (0..len)
                        .map(|_| {
                            StepFeature::from_array([
                                rng.gen_range(-500.0..500.0),
                                rng.gen_range(-500.0..500.0),
                                rng.gen_range(-3.0..3.0),
                                rng.gen_range(-180.0..180.0),
                                rng.gen_range(10.0..600.0),
                                rng.gen_range(10.0..600.0),
                            ])
                        })
                        .collect(),
                    label: [rng.gen_range(-500.0..500.0), rng.gen_range(-500.0..500.0)],
                    horizon_s: rng.gen_range(10.0..3600.0),
                    t_final: i as i64,
                }
            })
            .collect()
    }

    /// Two-pass oracle: explicit mean, then explicit sqrt of mean squared
    /// deviation, straight off the definition.
    fn two_pass(values: &[f64]) -> (f64, f64) {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        (mean, var.sqrt())
    }

    #[test]
    fn matches_two_pass_oracle_on_100_windows() {
        let windows = random_windows(100, 7);
        let s = fit_standardizer(&windows).unwrap();
        for k in 0..N_FEATURES {
            let values: Vec<f64> = windows
                .iter()
                .flat_map(|w| w.steps.iter().map(move |st| st.as_array()[k]))
                .collect();
            let (mean, std) = two_pass(&values);
            assert!((s.feature_mean[k] - mean).abs() < 1e-9 * mean.abs().max(1.0));
            assert!((s.feature_scale[k] - std).abs() < 1e-9 * std.max(1.0));
        }
        for k in 0..N_LABEL {
            let values: Vec<f64> = windows.iter().map(|w| w.label[k]).collect();
            let (mean, std) = two_pass(&values);
            assert!((s.label_mean[k] - mean).abs() < 1e-9 * mean.abs().max(1.0));
            assert!((s.label_scale[k] - std).abs() < 1e-9 * std.max(1.0));
        }
    }

    #[test]
    fn standardized_train_set_has_zero_mean_unit_scale() {
        let windows = random_windows(60, 11);
        let s = fit_standardizer(&windows).unwrap();
        let std_windows: Vec<TrainingWindow> = windows.iter().map(|w| s.apply(w)).collect();
        let refit = fit_standardizer(&std_windows).unwrap();
        for k in 0..N_FEATURES {
            assert!(refit.feature_mean[k].abs() < 1e-9);
            assert!((refit.feature_scale[k] - 1.0).abs() < 1e-9);
        }
        for k in 0..N_LABEL {
            assert!(refit.label_mean[k].abs() < 1e-9);
            assert!((refit.label_scale[k] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn apply_invert_round_trip() {
        let windows = random_windows(30, 3);
        let s = fit_standardizer(&windows).unwrap();
        for w in &windows {
            let back = s.invert(&s.apply(w));
            for (a, b) in w.steps.iter().zip(back.steps.iter()) {
                for (x, y) in a.as_array().iter().zip(b.as_array().iter()) {
                    assert!((x - y).abs() < 1e-9);
                }
            }
            assert!((w.label[0] - back.label[0]).abs() < 1e-9);
            assert!((w.label[1] - back.label[1]).abs() < 1e-9);
            assert_eq!(w.horizon_s, back.horizon_s);
            assert_eq!(w.t_final, back.t_final);
        }
    }

    #[test]
    fn constant_feature_is_rejected_by_name() {
        let mut windows = random_windows(10, 5);
        for w in &mut windows {
            for s in &mut w.steps {
                s.dphi = 42.0;
            }
        }
        match fit_standardizer(&windows) {
            Err(FeatureError::DegenerateFeature(name)) => assert_eq!(name, "dphi"),
            other => panic!("expected degenerate-feature error, got {other:?}"),
        }
    }

    #[test]
    fn empty_fit_set_errors() {
        assert!(matches!(fit_standardizer(&[]), Err(FeatureError::Empty)));
    }
}
