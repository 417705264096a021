use super::{FeatureError, ProjectionRef};
use crate::ingest::VesselTrajectory;
use serde::{Deserialize, Serialize};

/// Raw transition between consecutive points: displacement in projected
/// meters, speed and course change, duration, and the end-point wall clock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub dx: f64,
    pub dy: f64,
    pub dv: f64,
    pub dphi: f64,
    pub dt: f64,
    pub t_end: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionSequence {
    pub mmsi: u32,
    pub vessel_type: u32,
    pub steps: Vec<Transition>,
}

/// Signed course change mapped into (-180, 180]; a dead-ahead reversal
/// counts as +180.
pub fn wrap_course_delta(prev_deg: f64, curr_deg: f64) -> f64 {
    let mut d = curr_deg - prev_deg;
    if d > 180.0 {
        d -= 360.0;
    } else if d <= -180.0 {
        d += 360.0;
    }
    d
}

/// First-order differences of a projected trajectory. A trajectory of n
/// points yields n-1 transitions; fewer than 2 points is an error, as are
/// non-increasing timestamps.
pub fn derive_transitions(
    traj: &VesselTrajectory,
    proj: &ProjectionRef,
) -> Result<TransitionSequence, FeatureError> {
    if traj.points.len() < 2 {
        return Err(FeatureError::TooShort(traj.points.len()));
    }
    let mut steps = Vec::with_capacity(traj.points.len() - 1);
    for (i, pair) in traj.points.windows(2).enumerate() {
        let (a, b) = (&pair[0], &pair[1]);
        if b.t <= a.t {
            return Err(FeatureError::NonMonotonic(i + 1));
        }
        let (xa, ya) = proj.project(a.lon, a.lat);
        let (xb, yb) = proj.project(b.lon, b.lat);
        steps.push(Transition {
            dx: xb - xa,
            dy: yb - ya,
            dv: b.speed - a.speed,
            dphi: wrap_course_delta(a.course, b.course),
            dt: (b.t - a.t) as f64,
            t_end: b.t,
        });
    }
    Ok(TransitionSequence {
        mmsi: traj.mmsi,
        vessel_type: traj.vessel_type,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::TrajPoint;
    use proptest::prelude::*;

    fn point(t: i64, lon: f64, lat: f64, speed: f64, course: f64) -> TrajPoint {
        TrajPoint { t, lon, lat, speed, course }
    }

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap_course_delta(350.0, 10.0), 20.0);
        assert_eq!(wrap_course_delta(10.0, 350.0), -20.0);
        assert_eq!(wrap_course_delta(0.0, 180.0), 180.0);
        assert_eq!(wrap_course_delta(180.0, 0.0), 180.0);
        assert_eq!(wrap_course_delta(90.0, 90.0), 0.0);
    }

    #[test]
    fn transition_counts_and_values() {
        let proj = ProjectionRef::new(0.0, 0.0);
        let traj = VesselTrajectory {
            mmsi: 227_001_000,
            vessel_type: 70,
            points: vec![
                point(0, 0.0, 0.0, 10.0, 90.0),
                point(60, 0.001, 0.0, 12.0, 95.0),
                point(180, 0.002, 0.001, 11.0, 93.0),
            ],
        };
        let seq = derive_transitions(&traj, &proj).unwrap();
        assert_eq!(seq.steps.len(), 2);
        let s0 = &seq.steps[0];
        assert!((s0.dx - 0.001 * proj.m_per_deg_lon).abs() < 1e-9);
        assert_eq!(s0.dy, 0.0);
        assert_eq!(s0.dv, 2.0);
        assert_eq!(s0.dphi, 5.0);
        assert_eq!(s0.dt, 60.0);
        assert_eq!(s0.t_end, 60);
        assert_eq!(seq.steps[1].dt, 120.0);
    }

    #[test]
    fn too_short_and_non_monotonic_error() {
        let proj = ProjectionRef::new(0.0, 0.0);
        let one = VesselTrajectory {
            mmsi: 1,
            vessel_type: 0,
            points: vec![point(0, 0.0, 0.0, 1.0, 0.0)],
        };
        assert!(matches!(
            derive_transitions(&one, &proj),
            Err(FeatureError::TooShort(1))
        ));
        let bad = VesselTrajectory {
            mmsi: 1,
            vessel_type: 0,
            points: vec![point(10, 0.0, 0.0, 1.0, 0.0), point(10, 0.0, 0.0, 1.0, 0.0)],
        };
        assert!(matches!(
            derive_transitions(&bad, &proj),
            Err(FeatureError::NonMonotonic(1))
        ));
    }

    proptest! {
        #[test]
        fn wrap_stays_in_half_open_range(prev in 0.0f64..360.0, curr in 0.0f64..360.0) {
            let d = wrap_course_delta(prev, curr);
            prop_assert!(d > -180.0 && d <= 180.0);
            // the wrapped delta is congruent to the raw delta mod 360
            let raw = curr - prev;
            let diff = (d - raw).rem_euclid(360.0);
            prop_assert!(diff.abs() < 1e-9 || (diff - 360.0).abs() < 1e-9);
        }
    }
}
