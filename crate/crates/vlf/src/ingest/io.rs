use super::{IngestError, VesselTrajectory};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

/// Wire form of one trajectory: parallel arrays, one JSON object per line.
#[derive(Serialize, Deserialize)]
struct TrajLine {
    mmsi: u32,
    vessel_type: u32,
    t: Vec<i64>,
    lon: Vec<f64>,
    lat: Vec<f64>,
    speed: Vec<f64>,
    course: Vec<f64>,
}

impl From<&VesselTrajectory> for TrajLine {
    fn from(traj: &VesselTrajectory) -> Self {
        TrajLine {
            mmsi: traj.mmsi,
            vessel_type: traj.vessel_type,
            t: traj.points.iter().map(|p| p.t).collect(),
            lon: traj.points.iter().map(|p| p.lon).collect(),
            lat: traj.points.iter().map(|p| p.lat).collect(),
            speed: traj.points.iter().map(|p| p.speed).collect(),
            course: traj.points.iter().map(|p| p.course).collect(),
        }
    }
}

impl TryFrom<TrajLine> for VesselTrajectory {
    type Error = IngestError;

    fn try_from(line: TrajLine) -> Result<Self, IngestError> {
        let n = line.t.len();
        if [line.lon.len(), line.lat.len(), line.speed.len(), line.course.len()]
            .iter()
            .any(|&l| l != n)
        {
            return Err(IngestError::Format(format!(
                "trajectory {} has ragged arrays",
                line.mmsi
            )));
        }
        Ok(VesselTrajectory {
            mmsi: line.mmsi,
            vessel_type: line.vessel_type,
            points: (0..n)
                .map(|i| super::TrajPoint {
                    t: line.t[i],
                    lon: line.lon[i],
                    lat: line.lat[i],
                    speed: line.speed[i],
                    course: line.course[i],
                })
                .collect(),
        })
    }
}

pub fn write_trajectories_ndjson<W: Write>(
    mut w: W,
    trajs: &[VesselTrajectory],
) -> Result<(), IngestError> {
    for traj in trajs {
        let line = TrajLine::from(traj);
        serde_json::to_writer(&mut w, &line)
            .map_err(|e| IngestError::Format(e.to_string()))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trajectories_ndjson<R: BufRead>(r: R) -> Result<Vec<VesselTrajectory>, IngestError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: TrajLine = serde_json::from_str(&line)
            .map_err(|e| IngestError::Format(format!("line {}: {e}", i + 1)))?;
        out.push(VesselTrajectory::try_from(parsed)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::TrajPoint;

    #[test]
    fn ndjson_round_trip() {
        let trajs = vec![VesselTrajectory {
            mmsi: 227_001_000,
            vessel_type: 70,
            points: vec![
                TrajPoint { t: 0, lon: -4.5, lat: 48.0, speed: 10.0, course: 90.0 },
                TrajPoint { t: 60, lon: -4.49, lat: 48.01, speed: 11.0, course: 91.0 },
            ],
        }];
        let mut buf = Vec::new();
        write_trajectories_ndjson(&mut buf, &trajs).unwrap();
        let back = read_trajectories_ndjson(buf.as_slice()).unwrap();
        assert_eq!(back, trajs);
    }

    #[test]
    fn ragged_arrays_rejected() {
        let line = r#"{"mmsi":1,"vessel_type":0,"t":[0,1],"lon":[0.0],"lat":[0.0,0.0],"speed":[0.0,0.0],"course":[0.0,0.0]}"#;
        assert!(read_trajectories_ndjson(line.as_bytes()).is_err());
    }
}
