//! Feature engineering: local map projection, first-order-difference
//! transitions, semi-overlapping training windows, z-score standardization,
//! and the temporal train/val/test split.

mod io;
mod project;
mod split;
mod standardize;
mod transitions;
mod windows;

pub use io::{read_window_file, write_window_file, FeatureSidecar};
pub use project::ProjectionRef;
pub use split::temporal_split;
pub use standardize::{fit_standardizer, Standardizer, FEATURE_NAMES};
pub use transitions::{derive_transitions, wrap_course_delta, Transition, TransitionSequence};
pub use windows::{make_windows, window_count};

use crate::ingest::VesselTrajectory;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const N_FEATURES: usize = 6;
pub const N_LABEL: usize = 2;

/// Default window length bounds, in transitions.
pub const WINDOW_LEN_MIN: usize = 18;
pub const WINDOW_LEN_MAX: usize = 32;

/// Full corpus-to-windows assembly: derive transitions for every
/// trajectory under one shared projection and cut windows from each.
/// Trajectories too short to yield a single transition are skipped.
pub fn build_windows(
    trajectories: &[VesselTrajectory],
    proj: &ProjectionRef,
    len_min: usize,
    len_max: usize,
) -> Result<Vec<TrainingWindow>, FeatureError> {
    let mut out = Vec::new();
    for traj in trajectories {
        let seq = match derive_transitions(traj, proj) {
            Ok(seq) => seq,
            Err(FeatureError::TooShort(_)) => continue,
            Err(e) => return Err(e),
        };
        out.extend(make_windows(&seq, len_min, len_max)?);
    }
    Ok(out)
}

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("trajectory too short: {0} points")]
    TooShort(usize),
    #[error("trajectory timestamps not strictly increasing at index {0}")]
    NonMonotonic(usize),
    #[error("window length bounds invalid: [{0}, {1}]")]
    BadWindowBounds(usize, usize),
    #[error("no windows to fit on")]
    Empty,
    #[error("feature '{0}' is constant; cannot standardize")]
    DegenerateFeature(&'static str),
    #[error("split fractions invalid: train={0}, val={1}")]
    BadSplit(f64, f64),
    #[error("window file format error: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// One step of a vessel's motion, expressed as differences between two
/// consecutive (subsampled) positions. Distances are meters, speed knots,
/// course degrees, durations seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepFeature {
    pub dx: f64,
    pub dy: f64,
    pub dv: f64,
    pub dphi: f64,
    pub dt_curr: f64,
    pub dt_next: f64,
}

impl StepFeature {
    pub fn as_array(&self) -> [f64; N_FEATURES] {
        [self.dx, self.dy, self.dv, self.dphi, self.dt_curr, self.dt_next]
    }

    pub fn from_array(a: [f64; N_FEATURES]) -> Self {
        StepFeature {
            dx: a[0],
            dy: a[1],
            dv: a[2],
            dphi: a[3],
            dt_curr: a[4],
            dt_next: a[5],
        }
    }
}

/// A model input: `steps.len()` consecutive transitions plus the following
/// transition's displacement as the label. `horizon_s` is the label
/// transition's duration and `t_final` the wall clock of the last input
/// point, used for the temporal split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingWindow {
    pub vessel_type: u32,
    pub steps: Vec<StepFeature>,
    pub label: [f64; N_LABEL],
    pub horizon_s: f64,
    pub t_final: i64,
}

impl TrainingWindow {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}
