//! Seeded synthetic vessel traffic. Vessels move at constant speed with an
//! optional constant turn rate, reporting on a regular-ish cadence, which
//! gives training corpora with a known, learnable structure.

use crate::ingest::{IngestError, TrajPoint, VesselTrajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const M_PER_DEG_LAT: f64 = 111_320.0;
const MPS_PER_KNOT: f64 = 0.514444;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_vessels: usize,
    pub pts_per_vessel: usize,
    /// Report interval is drawn per step from these choices (seconds).
    pub dt_choices: Vec<i64>,
    pub speed_range_kn: (f64, f64),
    /// Per-step speed noise, uniform in ±this around the vessel's base speed.
    pub speed_jitter_kn: f64,
    /// Initial course is drawn from here (degrees clockwise from north).
    pub heading_range_deg: (f64, f64),
    /// Constant per-step course change, drawn once per vessel.
    pub turn_rate_range_deg: (f64, f64),
    pub vessel_types: Vec<u32>,
    /// Start positions: lon_min, lon_max, lat_min, lat_max.
    pub start_box: (f64, f64, f64, f64),
    pub t0: i64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_vessels: 50,
            pts_per_vessel: 200,
            dt_choices: vec![60],
            speed_range_kn: (8.0, 20.0),
            speed_jitter_kn: 0.0,
            heading_range_deg: (0.0, 360.0),
            turn_rate_range_deg: (0.0, 0.0),
            vessel_types: vec![0, 1, 2],
            start_box: (23.0, 24.0, 37.5, 38.5),
            t0: 1_577_836_800, // 2020-01-01T00:00:00Z
            seed: 0,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<(), IngestError> {
        if self.n_vessels == 0 || self.pts_per_vessel < 2 {
            return Err(IngestError::Config(
                "need at least one vessel and two points each".into(),
            ));
        }
        if self.dt_choices.is_empty() || self.dt_choices.iter().any(|&d| d <= 0) {
            return Err(IngestError::Config("dt choices must be positive".into()));
        }
        if self.vessel_types.is_empty() {
            return Err(IngestError::Config("no vessel types".into()));
        }
        let (s0, s1) = self.speed_range_kn;
        if !(s0.is_finite() && s1.is_finite() && 0.0 < s0 && s0 <= s1) {
            return Err(IngestError::Config(format!("bad speed range {s0}..{s1}")));
        }
        if !(self.speed_jitter_kn.is_finite() && self.speed_jitter_kn >= 0.0) {
            return Err(IngestError::Config("speed jitter must be >= 0".into()));
        }
        let (lon0, lon1, lat0, lat1) = self.start_box;
        if !(lon0 < lon1 && lat0 < lat1 && lat1.abs() < 85.0 && lon1.abs() <= 180.0) {
            return Err(IngestError::Config("bad start box".into()));
        }
        Ok(())
    }
}

fn sample(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..hi)
    }
}

/// Generates the configured fleet. MMSIs are 219_000_000 + index, which
/// carries a valid maritime identification prefix.
pub fn generate(cfg: &SynthConfig) -> Result<Vec<VesselTrajectory>, IngestError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(cfg.n_vessels);
    for i in 0..cfg.n_vessels {
        let vessel_type = cfg.vessel_types[rng.gen_range(0..cfg.vessel_types.len())];
        let mut lon = sample(&mut rng, (cfg.start_box.0, cfg.start_box.1));
        let mut lat = sample(&mut rng, (cfg.start_box.2, cfg.start_box.3));
        let base_speed = sample(&mut rng, cfg.speed_range_kn);
        let mut course = sample(&mut rng, cfg.heading_range_deg).rem_euclid(360.0);
        let turn = sample(&mut rng, cfg.turn_rate_range_deg);
        let mut t = cfg.t0;
        let mut points = Vec::with_capacity(cfg.pts_per_vessel);
        for _ in 0..cfg.pts_per_vessel {
            let speed = if cfg.speed_jitter_kn > 0.0 {
                let j = cfg.speed_jitter_kn;
                (base_speed + sample(&mut rng, (-j, j))).max(0.1)
            } else {
                base_speed
            };
            points.push(TrajPoint {
                t,
                lon,
                lat,
                speed,
                course,
            });
            let dt = cfg.dt_choices[rng.gen_range(0..cfg.dt_choices.len())];
            let dist_m = speed * MPS_PER_KNOT * dt as f64;
            let theta = course.to_radians();
            lat += dist_m * theta.cos() / M_PER_DEG_LAT;
            lon += dist_m * theta.sin() / (M_PER_DEG_LAT * lat.to_radians().cos());
            course = (course + turn).rem_euclid(360.0);
            t += dt;
        }
        out.push(VesselTrajectory {
            mmsi: 219_000_000 + i as u32,
            vessel_type,
            points,
        });
    }
    Ok(out)
}

/// Renders trajectories as an AIS-style CSV with the default column names,
/// interleaved across vessels in timestamp order.
pub fn to_ais_csv(trajectories: &[VesselTrajectory]) -> String {
    let mut rows: Vec<(i64, u32, String)> = Vec::new();
    for tr in trajectories {
        for p in &tr.points {
            rows.push((
                p.t,
                tr.mmsi,
                format!(
                    "{},{},{},{},{},{},{}\n",
                    tr.mmsi, p.t, p.lon, p.lat, p.speed, p.course, tr.vessel_type
                ),
            ));
        }
    }
    rows.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut out = String::from("mmsi,t,lon,lat,speed,course,shiptype\n");
    for (_, _, row) in rows {
        out.push_str(&row);
    }
    out
}

/// Two fleets with deliberately disjoint movement regimes (different
/// speed bands and headings) for heterogeneous-silo experiments.
pub fn two_regime_configs(seed: u64) -> (SynthConfig, SynthConfig) {
    let a = SynthConfig {
        n_vessels: 24,
        pts_per_vessel: 120,
        dt_choices: vec![30, 60, 120],
        speed_range_kn: (6.0, 9.0),
        speed_jitter_kn: 0.5,
        heading_range_deg: (20.0, 70.0),
        turn_rate_range_deg: (-0.25, 0.25),
        start_box: (23.0, 23.5, 37.5, 38.0),
        seed,
        ..SynthConfig::default()
    };
    let b = SynthConfig {
        n_vessels: 24,
        pts_per_vessel: 120,
        dt_choices: vec![30, 60, 120],
        speed_range_kn: (16.0, 22.0),
        speed_jitter_kn: 0.5,
        heading_range_deg: (200.0, 250.0),
        turn_rate_range_deg: (-0.25, 0.25),
        start_box: (23.5, 24.0, 38.0, 38.5),
        seed: seed ^ 0x9E37_79B9_7F4A_7C15,
        ..SynthConfig::default()
    };
    (a, b)
}
