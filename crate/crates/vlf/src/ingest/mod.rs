//! AIS ingestion: CSV parsing, cleaning, segmentation, corpus statistics.
//!
//! The cleaning pipeline applies, in order: deduplication, MID (flag-state)
//! filtering, temporal subsampling, minimum-length drop, speed filtering,
//! and gap segmentation. `clean_dataset` runs the whole chain and reports
//! per-stage counts.

mod clean;
mod csv_parse;
mod io;
mod stats;

pub use clean::{
    clean_dataset, deduplicate, filter_speed, group_into_trajectories, segment, subsample,
    validate_mid, PipelineReport,
};
pub use csv_parse::{parse_ais_csv, parse_ais_csv_path, CsvSchema};
pub use io::{read_trajectories_ndjson, write_trajectories_ndjson};
pub use stats::{compute_stats, BoundingBox, CountStat, DatasetStats, GapStat};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("csv schema error: {0}")]
    Schema(String),
    #[error("csv read error: {0}")]
    Csv(#[from] ::csv::Error),
    #[error("identifier {0} is not a 9-digit MMSI")]
    MalformedId(u64),
    #[error("invalid cleaning config: {0}")]
    Config(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("trajectory file format error: {0}")]
    Format(String),
}

/// One positional report from a vessel transponder. Timestamps are epoch
/// seconds, speed is in knots, course in degrees clockwise from north.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AisRecord {
    pub mmsi: u32,
    pub t: i64,
    pub lon: f64,
    pub lat: f64,
    pub speed: f64,
    pub course: f64,
    pub vessel_type: u32,
}

/// A single point of a per-vessel track, after records are grouped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajPoint {
    pub t: i64,
    pub lon: f64,
    pub lat: f64,
    pub speed: f64,
    pub course: f64,
}

/// Time-ordered positions of one vessel (or one segment of one vessel).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VesselTrajectory {
    pub mmsi: u32,
    pub vessel_type: u32,
    pub points: Vec<TrajPoint>,
}

impl VesselTrajectory {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Thresholds for the cleaning pipeline. Defaults: 10 s minimum spacing,
/// 20-point minimum length, 1..=50 kn speed band, 30 min segmentation gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CleaningConfig {
    pub dt_min_s: i64,
    pub min_pts: usize,
    pub speed_min_kn: f64,
    pub speed_max_kn: f64,
    pub t_max_s: i64,
}

impl Default for CleaningConfig {
    fn default() -> Self {
        CleaningConfig {
            dt_min_s: 10,
            min_pts: 20,
            speed_min_kn: 1.0,
            speed_max_kn: 50.0,
            t_max_s: 1800,
        }
    }
}

impl CleaningConfig {
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.dt_min_s <= 0 {
            return Err(IngestError::Config("dt_min_s must be positive".into()));
        }
        if self.min_pts < 2 {
            return Err(IngestError::Config("min_pts must be at least 2".into()));
        }
        if !(self.speed_min_kn >= 0.0 && self.speed_max_kn > self.speed_min_kn) {
            return Err(IngestError::Config(
                "speed band must satisfy 0 <= min < max".into(),
            ));
        }
        if self.t_max_s <= self.dt_min_s {
            return Err(IngestError::Config(
                "t_max_s must exceed dt_min_s".into(),
            ));
        }
        Ok(())
    }
}
