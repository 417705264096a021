use super::{IngestError, VesselTrajectory};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapStat {
    pub min_s: f64,
    pub avg_s: f64,
    pub max_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountStat {
    pub min: u64,
    pub avg: f64,
    pub max: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lon_min: f64,
    pub lon_max: f64,
    pub lat_min: f64,
    pub lat_max: f64,
}

/// Corpus summary over cleaned trajectories. Record counts here are
/// post-pipeline; pre-pipeline counts live in the PipelineReport.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub n_records: u64,
    pub n_vessels: u64,
    pub n_trajectories: u64,
    pub sampling_rate: GapStat,
    pub pts_per_trajectory: CountStat,
    pub spatial_range: BoundingBox,
    pub t_start: i64,
    pub t_end: i64,
}

pub fn compute_stats(trajs: &[VesselTrajectory]) -> Result<DatasetStats, IngestError> {
    if trajs.iter().all(|t| t.is_empty()) {
        return Err(IngestError::EmptyDataset);
    }
    let mut n_records = 0u64;
    let mut vessels: HashSet<u32> = HashSet::new();
    let mut gap_min = f64::INFINITY;
    let mut gap_max = f64::NEG_INFINITY;
    let mut gap_sum = 0.0f64;
    let mut gap_n = 0u64;
    let mut pts_min = u64::MAX;
    let mut pts_max = 0u64;
    let mut bbox = BoundingBox {
        lon_min: f64::INFINITY,
        lon_max: f64::NEG_INFINITY,
        lat_min: f64::INFINITY,
        lat_max: f64::NEG_INFINITY,
    };
    let mut t_start = i64::MAX;
    let mut t_end = i64::MIN;

    for traj in trajs {
        if traj.is_empty() {
            continue;
        }
        let n = traj.len() as u64;
        n_records += n;
        vessels.insert(traj.mmsi);
        pts_min = pts_min.min(n);
        pts_max = pts_max.max(n);
        for pair in traj.points.windows(2) {
            let gap = (pair[1].t - pair[0].t) as f64;
            gap_min = gap_min.min(gap);
            gap_max = gap_max.max(gap);
            gap_sum += gap;
            gap_n += 1;
        }
        for p in &traj.points {
            bbox.lon_min = bbox.lon_min.min(p.lon);
            bbox.lon_max = bbox.lon_max.max(p.lon);
            bbox.lat_min = bbox.lat_min.min(p.lat);
            bbox.lat_max = bbox.lat_max.max(p.lat);
            t_start = t_start.min(p.t);
            t_end = t_end.max(p.t);
        }
    }

    let n_trajectories = trajs.iter().filter(|t| !t.is_empty()).count() as u64;
    Ok(DatasetStats {
        n_records,
        n_vessels: vessels.len() as u64,
        n_trajectories,
        sampling_rate: if gap_n == 0 {
            GapStat { min_s: 0.0, avg_s: 0.0, max_s: 0.0 }
        } else {
            GapStat {
                min_s: gap_min,
                avg_s: gap_sum / gap_n as f64,
                max_s: gap_max,
            }
        },
        pts_per_trajectory: CountStat {
            min: pts_min,
            avg: n_records as f64 / n_trajectories as f64,
            max: pts_max,
        },
        spatial_range: bbox,
        t_start,
        t_end,
    })
}
