use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use vlf::features::{
    build_windows, fit_standardizer, temporal_split, ProjectionRef, Standardizer, TrainingWindow,
};
use vlf::ingest::{read_trajectories_ndjson, VesselTrajectory};

use crate::config::WindowingConfig;
use crate::error::CliError;

pub fn load_trajectories(path: &Path) -> Result<Vec<VesselTrajectory>, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::Io(format!("opening {}: {e}", path.display())))?;
    Ok(read_trajectories_ndjson(BufReader::new(file))?)
}

/// Windows straight from a trajectory file, unsplit and unstandardized.
pub fn raw_windows(path: &Path, w: &WindowingConfig) -> Result<Vec<TrainingWindow>, CliError> {
    let trajs = load_trajectories(path)?;
    let proj = ProjectionRef::from_trajectories(&trajs)
        .ok_or_else(|| CliError::Data(format!("{}: no trajectory points", path.display())))?;
    let windows = build_windows(&trajs, &proj, w.len_min, w.len_max)?;
    if windows.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no windows (all trajectories shorter than {} transitions)",
            path.display(),
            w.len_min + 1
        )));
    }
    Ok(windows)
}

/// One dataset prepared for training: temporally split, standardized with
/// parameters fitted on the training portion only.
pub struct PreparedData {
    pub train: Vec<TrainingWindow>,
    pub val: Vec<TrainingWindow>,
    pub test: Vec<TrainingWindow>,
    pub standardizer: Standardizer,
    /// Smallest embedding vocabulary that covers every vessel type seen.
    pub vocab: usize,
}

pub fn assemble(path: &Path, w: &WindowingConfig) -> Result<PreparedData, CliError> {
    let windows = raw_windows(path, w)?;
    let vocab = infer_vocab(&windows);
    let (train, val, test) = temporal_split(windows, w.train_frac, w.val_frac)?;
    if train.is_empty() || val.is_empty() {
        return Err(CliError::Data(format!(
            "{}: split left train/val empty ({}/{}/{} windows)",
            path.display(),
            train.len(),
            val.len(),
            test.len()
        )));
    }
    let standardizer = fit_standardizer(&train)?;
    Ok(PreparedData {
        train: apply_all(&standardizer, &train),
        val: apply_all(&standardizer, &val),
        test: apply_all(&standardizer, &test),
        standardizer,
        vocab,
    })
}

pub fn infer_vocab(windows: &[TrainingWindow]) -> usize {
    windows
        .iter()
        .map(|w| w.vessel_type as usize + 1)
        .max()
        .unwrap_or(1)
}

pub fn apply_all(s: &Standardizer, windows: &[TrainingWindow]) -> Vec<TrainingWindow> {
    windows.iter().map(|w| s.apply(w)).collect()
}
