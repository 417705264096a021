use super::{AisRecord, CleaningConfig, IngestError, TrajPoint, VesselTrajectory};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Drops records that repeat an already-seen (mmsi, t) key; the first
/// occurrence in input order wins. Output is sorted by (mmsi, t).
pub fn deduplicate(records: Vec<AisRecord>) -> Vec<AisRecord> {
    let mut seen: HashSet<(u32, i64)> = HashSet::with_capacity(records.len());
    let mut out: Vec<AisRecord> = records
        .into_iter()
        .filter(|r| seen.insert((r.mmsi, r.t)))
        .collect();
    out.sort_by_key(|r| (r.mmsi, r.t));
    out
}

/// Flag-state check on the first three digits of the MMSI. Ship stations
/// carry a MID in 201..=775; anything else (base stations, SAR aircraft,
/// aids to navigation) is rejected. Errors on inputs that are not 9 digits.
pub fn validate_mid(mmsi: u64) -> Result<bool, IngestError> {
    if !(100_000_000..=999_999_999).contains(&mmsi) {
        return Err(IngestError::MalformedId(mmsi));
    }
    let mid = mmsi / 1_000_000;
    Ok((201..=775).contains(&mid))
}

/// Groups records into one trajectory per vessel, points ordered by time.
/// The vessel type is taken from the vessel's first record.
pub fn group_into_trajectories(mut records: Vec<AisRecord>) -> Vec<VesselTrajectory> {
    records.sort_by_key(|r| (r.mmsi, r.t));
    let mut out: Vec<VesselTrajectory> = Vec::new();
    for r in records {
        let point = TrajPoint {
            t: r.t,
            lon: r.lon,
            lat: r.lat,
            speed: r.speed,
            course: r.course,
        };
        match out.last_mut() {
            Some(traj) if traj.mmsi == r.mmsi => traj.points.push(point),
            _ => out.push(VesselTrajectory {
                mmsi: r.mmsi,
                vessel_type: r.vessel_type,
                points: vec![point],
            }),
        }
    }
    out
}

/// Greedy temporal thinning: walks the trajectory keeping the first point,
/// then every point at least `dt_min_s` after the last kept one.
pub fn subsample(traj: &VesselTrajectory, dt_min_s: i64) -> VesselTrajectory {
    let mut points = Vec::with_capacity(traj.points.len());
    let mut last_kept: Option<i64> = None;
    for p in &traj.points {
        let keep = match last_kept {
            None => true,
            Some(t0) => p.t - t0 >= dt_min_s,
        };
        if keep {
            points.push(*p);
            last_kept = Some(p.t);
        }
    }
    VesselTrajectory {
        mmsi: traj.mmsi,
        vessel_type: traj.vessel_type,
        points,
    }
}

/// Keeps points whose speed lies inside the configured band (inclusive).
/// Points at anchor and implausible spikes both fall outside it.
pub fn filter_speed(traj: &VesselTrajectory, cfg: &CleaningConfig) -> VesselTrajectory {
    VesselTrajectory {
        mmsi: traj.mmsi,
        vessel_type: traj.vessel_type,
        points: traj
            .points
            .iter()
            .filter(|p| p.speed >= cfg.speed_min_kn && p.speed <= cfg.speed_max_kn)
            .copied()
            .collect(),
    }
}

/// Splits a trajectory wherever consecutive points are more than `t_max_s`
/// apart, then discards segments shorter than `min_pts`.
pub fn segment(traj: &VesselTrajectory, cfg: &CleaningConfig) -> Vec<VesselTrajectory> {
    let mut segments: Vec<Vec<TrajPoint>> = Vec::new();
    let mut current: Vec<TrajPoint> = Vec::new();
    for p in &traj.points {
        if let Some(prev) = current.last() {
            if p.t - prev.t > cfg.t_max_s {
                segments.push(std::mem::take(&mut current));
            }
        }
        current.push(*p);
    }
    if !current.is_empty() {
        segments.push(current);
    }
    segments
        .into_iter()
        .filter(|s| s.len() >= cfg.min_pts)
        .map(|points| VesselTrajectory {
            mmsi: traj.mmsi,
            vessel_type: traj.vessel_type,
            points,
        })
        .collect()
}

/// Record and trajectory counts at each pipeline stage. Both the raw and
/// the post-subsampling record counts are reported since corpus summaries
/// are quoted against either.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct PipelineReport {
    pub records_in: u64,
    pub records_after_dedup: u64,
    pub vessels_after_dedup: u64,
    pub vessels_after_mid: u64,
    pub records_after_subsample: u64,
    pub trajectories_after_min_pts: u64,
    pub records_after_speed: u64,
    pub trajectories_out: u64,
    pub records_out: u64,
}

/// Runs the full cleaning chain: dedup, MID filter, subsample, minimum
/// length, speed band, gap segmentation.
pub fn clean_dataset(
    records: Vec<AisRecord>,
    cfg: &CleaningConfig,
) -> Result<(Vec<VesselTrajectory>, PipelineReport), IngestError> {
    cfg.validate()?;
    let mut report = PipelineReport {
        records_in: records.len() as u64,
        ..Default::default()
    };

    let deduped = deduplicate(records);
    report.records_after_dedup = deduped.len() as u64;

    let mut trajs = group_into_trajectories(deduped);
    report.vessels_after_dedup = trajs.len() as u64;

    trajs.retain(|t| validate_mid(t.mmsi as u64).unwrap_or(false));
    report.vessels_after_mid = trajs.len() as u64;

    let mut subsampled: Vec<VesselTrajectory> =
        trajs.iter().map(|t| subsample(t, cfg.dt_min_s)).collect();
    report.records_after_subsample = subsampled.iter().map(|t| t.len() as u64).sum();

    subsampled.retain(|t| t.len() >= cfg.min_pts);
    report.trajectories_after_min_pts = subsampled.len() as u64;

    let speed_filtered: Vec<VesselTrajectory> =
        subsampled.iter().map(|t| filter_speed(t, cfg)).collect();
    report.records_after_speed = speed_filtered.iter().map(|t| t.len() as u64).sum();

    let mut out = Vec::new();
    for traj in &speed_filtered {
        out.extend(segment(traj, cfg));
    }
    report.trajectories_out = out.len() as u64;
    report.records_out = out.iter().map(|t| t.len() as u64).sum();

    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(mmsi: u32, t: i64) -> AisRecord {
        AisRecord {
            mmsi,
            t,
            lon: 0.0,
            lat: 0.0,
            speed: 10.0,
            course: 0.0,
            vessel_type: 70,
        }
    }

    fn traj(ts: &[i64]) -> VesselTrajectory {
        VesselTrajectory {
            mmsi: 227_001_000,
            vessel_type: 70,
            points: ts
                .iter()
                .map(|&t| TrajPoint {
                    t,
                    lon: 0.0,
                    lat: 0.0,
                    speed: 10.0,
                    course: 0.0,
                })
                .collect(),
        }
    }

    #[test]
    fn dedup_first_occurrence_wins() {
        let mut a = rec(227_001_000, 100);
        a.speed = 1.0;
        let mut b = rec(227_001_000, 100);
        b.speed = 2.0;
        let out = deduplicate(vec![a, b]);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].speed, 1.0);
    }

    #[test]
    fn dedup_sorts_by_vessel_then_time() {
        let out = deduplicate(vec![rec(300_000_000, 5), rec(227_001_000, 9), rec(227_001_000, 2)]);
        let keys: Vec<(u32, i64)> = out.iter().map(|r| (r.mmsi, r.t)).collect();
        assert_eq!(keys, vec![(227_001_000, 2), (227_001_000, 9), (300_000_000, 5)]);
    }

    #[test]
    fn dedup_is_idempotent() {
        let recs = vec![rec(227_001_000, 1), rec(227_001_000, 1), rec(300_000_000, 3)];
        let once = deduplicate(recs);
        let twice = deduplicate(once.clone());
        assert_eq!(once, twice);
    }

    #[test]
    fn mid_boundaries() {
        assert!(validate_mid(201_000_000).unwrap());
        assert!(validate_mid(775_999_999).unwrap());
        assert!(!validate_mid(200_999_999).unwrap());
        assert!(!validate_mid(776_000_000).unwrap());
        assert!(!validate_mid(999_123_456).unwrap());
    }

    #[test]
    fn mid_rejects_malformed() {
        assert!(matches!(validate_mid(12_345_678), Err(IngestError::MalformedId(_))));
        assert!(matches!(validate_mid(1_000_000_000), Err(IngestError::MalformedId(_))));
    }

    #[test]
    fn subsample_greedy_keep_first() {
        let out = subsample(&traj(&[0, 4, 9, 12, 20, 24, 31]), 10);
        let ts: Vec<i64> = out.points.iter().map(|p| p.t).collect();
        assert_eq!(ts, vec![0, 12, 24]);
    }

    #[test]
    fn subsample_keeps_spacing_at_threshold() {
        let out = subsample(&traj(&[0, 10, 20, 29, 30]), 10);
        let ts: Vec<i64> = out.points.iter().map(|p| p.t).collect();
        assert_eq!(ts, vec![0, 10, 20, 30]);
    }

    #[test]
    fn speed_band_inclusive() {
        let mut t = traj(&[0, 10, 20, 30]);
        t.points[0].speed = 0.5;
        t.points[1].speed = 1.0;
        t.points[2].speed = 50.0;
        t.points[3].speed = 50.1;
        let out = filter_speed(&t, &CleaningConfig::default());
        let speeds: Vec<f64> = out.points.iter().map(|p| p.speed).collect();
        assert_eq!(speeds, vec![1.0, 50.0]);
    }

    #[test]
    fn segment_splits_on_gap_and_drops_short_tail() {
        // 25 points at 60 s spacing with a 40 min hole after the 20th:
        // the head survives as one segment, the 5-point tail is dropped.
        let mut ts: Vec<i64> = (0..20).map(|i| i * 60).collect();
        let resume = ts[19] + 2400;
        ts.extend((0..5).map(|i| resume + i * 60));
        let cfg = CleaningConfig::default();
        let segs = segment(&traj(&ts), &cfg);
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].len(), 20);
        assert_eq!(segs[0].points[0].t, 0);
    }

    #[test]
    fn segment_keeps_gap_at_threshold() {
        let cfg = CleaningConfig {
            min_pts: 2,
            ..CleaningConfig::default()
        };
        let segs = segment(&traj(&[0, 1800, 3601]), &cfg);
        // 1800 s gap is allowed, 1801 s gap splits
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].points.len(), 2);
    }

    #[test]
    fn pipeline_rejects_bad_config() {
        let cfg = CleaningConfig {
            dt_min_s: 0,
            ..CleaningConfig::default()
        };
        assert!(matches!(
            clean_dataset(vec![rec(227_001_000, 0)], &cfg),
            Err(IngestError::Config(_))
        ));
    }

    #[test]
    fn pipeline_counts_are_monotone() {
        let mut records = Vec::new();
        for v in 0u32..5 {
            let mmsi = 201_000_000 + v * 7_000_000 + 123;
            for i in 0..120i64 {
                records.push(rec(mmsi, i * 30));
            }
        }
        // duplicates and an out-of-MID vessel
        records.push(rec(201_000_123, 0));
        for i in 0..50i64 {
            records.push(rec(999_000_001, i * 30));
        }
        let (out, rep) = clean_dataset(records, &CleaningConfig::default()).unwrap();
        assert!(rep.records_after_dedup <= rep.records_in);
        assert!(rep.records_after_subsample <= rep.records_after_dedup);
        assert!(rep.records_after_speed <= rep.records_after_subsample);
        assert!(rep.records_out <= rep.records_after_speed);
        assert_eq!(rep.vessels_after_mid, 5);
        assert_eq!(rep.trajectories_out as usize, out.len());
    }
}
