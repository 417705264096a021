use super::EvalError;
use serde::{Deserialize, Serialize};

/// Evaluation grid for the density map. Without explicit bounds the box
/// spans the 1st to 99th percentile of the points on each axis (falling
/// back to the full min/max range if that box collapses).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub bounds: Option<[f64; 4]>, // xmin, xmax, ymin, ymax
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            nx: 200,
            ny: 200,
            bounds: None,
        }
    }
}

/// Gaussian kernel density estimate sampled on a regular grid; density is
/// row-major with x varying fastest: `density[iy * nx + ix]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KdeMap {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: [f64; 2],
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = q * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

fn axis_values(points: &[[f64; 2]], axis: usize) -> Vec<f64> {
    let mut v: Vec<f64> = points.iter().map(|p| p[axis]).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn auto_bounds(points: &[[f64; 2]], axis: usize) -> (f64, f64) {
    let sorted = axis_values(points, axis);
    let lo = percentile(&sorted, 0.01);
    let hi = percentile(&sorted, 0.99);
    if hi > lo {
        (lo, hi)
    } else {
        (sorted[0], sorted[sorted.len() - 1])
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

/// Two-dimensional Gaussian KDE with per-axis Scott bandwidth
/// n^(-1/6) * sigma.
pub fn kde2(points: &[[f64; 2]], grid: &GridSpec) -> Result<KdeMap, EvalError> {
    if points.len() < 2 {
        return Err(EvalError::Empty);
    }
    if grid.nx < 2 || grid.ny < 2 {
        return Err(EvalError::BadGrid(format!(
            "grid {}x{} too small",
            grid.nx, grid.ny
        )));
    }
    if points.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
        return Err(EvalError::Degenerate("non-finite point".into()));
    }

    let n = points.len() as f64;
    let mut bandwidth = [0.0f64; 2];
    for axis in 0..2 {
        let mean: f64 = points.iter().map(|p| p[axis]).sum::<f64>() / n;
        let var: f64 = points.iter().map(|p| (p[axis] - mean).powi(2)).sum::<f64>() / n;
        let sigma = var.sqrt();
        if sigma <= 0.0 {
            return Err(EvalError::Degenerate(format!(
                "axis {axis} has zero spread"
            )));
        }
        bandwidth[axis] = n.powf(-1.0 / 6.0) * sigma;
    }

    let (xmin, xmax, ymin, ymax) = match grid.bounds {
        Some([a, b, c, d]) => {
            if !(a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite() && b > a && d > c)
            {
                return Err(EvalError::BadGrid(format!("bounds {:?}", grid.bounds)));
            }
            (a, b, c, d)
        }
        None => {
            let (xmin, xmax) = auto_bounds(points, 0);
            let (ymin, ymax) = auto_bounds(points, 1);
            if !(xmax > xmin && ymax > ymin) {
                return Err(EvalError::Degenerate("all points identical".into()));
            }
            (xmin, xmax, ymin, ymax)
        }
    };

    let xs = linspace(xmin, xmax, grid.nx);
    let ys = linspace(ymin, ymax, grid.ny);
    let norm = 1.0 / (n * 2.0 * std::f64::consts::PI * bandwidth[0] * bandwidth[1]);
    let inv2hx2 = 1.0 / (2.0 * bandwidth[0] * bandwidth[0]);
    let inv2hy2 = 1.0 / (2.0 * bandwidth[1] * bandwidth[1]);

    let mut density = vec![0.0f64; grid.nx * grid.ny];
    for (iy, &gy) in ys.iter().enumerate() {
        for (ix, &gx) in xs.iter().enumerate() {
            let mut acc = 0.0;
            for p in points {
                let dx = gx - p[0];
                let dy = gy - p[1];
                acc += (-(dx * dx * inv2hx2 + dy * dy * inv2hy2)).exp();
            }
            density[iy * grid.nx + ix] = acc * norm;
        }
    }
    Ok(KdeMap {
        xs,
        ys,
        density,
        bandwidth,
    })
}

/// CSV dump, one `x,y,density` row per grid node.
pub fn kde_csv(map: &KdeMap) -> String {
    let mut out = String::from("x,y,density\n");
    for (iy, &y) in map.ys.iter().enumerate() {
        for (ix, &x) in map.xs.iter().enumerate() {
            out.push_str(&format!("{x},{y},{}\n", map.density[iy * map.xs.len() + ix]));
        }
    }
    out
}
