use super::EvalError;
use crate::features::{TrainingWindow, N_FEATURES};
use nalgebra::{DMatrix, SymmetricEigen};

/// Two-component linear projection of the window feature space, fitted on
/// per-window mean feature vectors. Used to eyeball how silo data clouds
/// relate to each other.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Pca2 {
    pub mean: [f64; N_FEATURES],
    pub components: [[f64; N_FEATURES]; 2],
    /// Fraction of total variance captured by each component.
    pub explained: [f64; 2],
}

fn window_mean(w: &TrainingWindow) -> [f64; N_FEATURES] {
    let mut m = [0.0f64; N_FEATURES];
    for s in &w.steps {
        for (k, v) in s.as_array().into_iter().enumerate() {
            m[k] += v;
        }
    }
    let n = w.len() as f64;
    for v in &mut m {
        *v /= n;
    }
    m
}

/// Fits the projection: covariance of per-window mean features, top two
/// eigenvectors. Each component is sign-normalized so its largest-magnitude
/// entry is positive, making the output deterministic.
pub fn pca2(windows: &[TrainingWindow]) -> Result<Pca2, EvalError> {
    if windows.is_empty() {
        return Err(EvalError::Empty);
    }
    if windows.len() < 2 {
        return Err(EvalError::Degenerate(
            "need at least two windows for a covariance".into(),
        ));
    }
    let rows: Vec<[f64; N_FEATURES]> = windows.iter().map(window_mean).collect();
    let n = rows.len() as f64;
    let mut mean = [0.0f64; N_FEATURES];
    for r in &rows {
        for k in 0..N_FEATURES {
            mean[k] += r[k];
        }
    }
    for v in &mut mean {
        *v /= n;
    }
    if mean.iter().any(|v| !v.is_finite()) {
        return Err(EvalError::Degenerate("non-finite feature values".into()));
    }

    let mut cov = DMatrix::<f64>::zeros(N_FEATURES, N_FEATURES);
    for r in &rows {
        for i in 0..N_FEATURES {
            let di = r[i] - mean[i];
            for j in i..N_FEATURES {
                cov[(i, j)] += di * (r[j] - mean[j]);
            }
        }
    }
    for i in 0..N_FEATURES {
        for j in i..N_FEATURES {
            cov[(i, j)] /= n;
            cov[(j, i)] = cov[(i, j)];
        }
    }
    let total_var = cov.trace();
    if !(total_var.is_finite() && total_var > 0.0) {
        return Err(EvalError::Degenerate("feature cloud has no variance".into()));
    }

    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..N_FEATURES).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut components = [[0.0f64; N_FEATURES]; 2];
    let mut explained = [0.0f64; 2];
    for c in 0..2 {
        let col = eig.eigenvectors.column(order[c]);
        let mut v = [0.0f64; N_FEATURES];
        for k in 0..N_FEATURES {
            v[k] = col[k];
        }
        // sign convention: largest-magnitude entry points positive
        let lead = (0..N_FEATURES)
            .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()))
            .unwrap();
        if v[lead] < 0.0 {
            for x in &mut v {
                *x = -*x;
            }
        }
        components[c] = v;
        explained[c] = (eig.eigenvalues[order[c]] / total_var).max(0.0);
    }
    Ok(Pca2 {
        mean,
        components,
        explained,
    })
}

impl Pca2 {
    /// Projects one window onto the two components.
    pub fn project(&self, w: &TrainingWindow) -> [f64; 2] {
        let m = window_mean(w);
        let mut out = [0.0f64; 2];
        for c in 0..2 {
            for k in 0..N_FEATURES {
                out[c] += (m[k] - self.mean[k]) * self.components[c][k];
            }
        }
        out
    }
}
