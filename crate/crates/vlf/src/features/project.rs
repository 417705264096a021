use crate::ingest::VesselTrajectory;
use serde::{Deserialize, Serialize};

const M_PER_DEG: f64 = 111_320.0;

/// Local equirectangular projection around a reference point. Adequate for
/// areas up to a few hundred kilometers; x grows east, y grows north.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionRef {
    pub lon0: f64,
    pub lat0: f64,
    pub m_per_deg_lon: f64,
    pub m_per_deg_lat: f64,
}

impl ProjectionRef {
    pub fn new(lon0: f64, lat0: f64) -> Self {
        ProjectionRef {
            lon0,
            lat0,
            m_per_deg_lon: M_PER_DEG * lat0.to_radians().cos(),
            m_per_deg_lat: M_PER_DEG,
        }
    }

    /// Reference at the centroid of the corpus bounding box.
    pub fn from_trajectories(trajs: &[VesselTrajectory]) -> Option<Self> {
        let mut lon_min = f64::INFINITY;
        let mut lon_max = f64::NEG_INFINITY;
        let mut lat_min = f64::INFINITY;
        let mut lat_max = f64::NEG_INFINITY;
        let mut any = false;
        for traj in trajs {
            for p in &traj.points {
                lon_min = lon_min.min(p.lon);
                lon_max = lon_max.max(p.lon);
                lat_min = lat_min.min(p.lat);
                lat_max = lat_max.max(p.lat);
                any = true;
            }
        }
        any.then(|| ProjectionRef::new((lon_min + lon_max) / 2.0, (lat_min + lat_max) / 2.0))
    }

    pub fn project(&self, lon: f64, lat: f64) -> (f64, f64) {
        (
            (lon - self.lon0) * self.m_per_deg_lon,
            (lat - self.lat0) * self.m_per_deg_lat,
        )
    }

    pub fn unproject(&self, x: f64, y: f64) -> (f64, f64) {
        (x / self.m_per_deg_lon + self.lon0, y / self.m_per_deg_lat + self.lat0)
    }
}
