use super::{
    FeatureError, ProjectionRef, Standardizer, StepFeature, TrainingWindow, N_FEATURES, N_LABEL,
};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

const MAGIC: &[u8; 4] = b"VLFW";
const VERSION: u32 = 1;

/// Everything needed to reproduce a window file from raw trajectories:
/// the projection, the fitted standardizer, and the window length bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSidecar {
    pub projection: ProjectionRef,
    pub standardizer: Standardizer,
    pub len_min: usize,
    pub len_max: usize,
}

/// Writes windows as a little-endian binary record file: a fixed header
/// (magic, version, window count, feature and label widths) followed by
/// one length-prefixed record per window.
pub fn write_window_file<W: Write>(mut w: W, windows: &[TrainingWindow]) -> Result<(), FeatureError> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(windows.len() as u64).to_le_bytes())?;
    w.write_all(&(N_FEATURES as u32).to_le_bytes())?;
    w.write_all(&(N_LABEL as u32).to_le_bytes())?;
    for win in windows {
        w.write_all(&win.vessel_type.to_le_bytes())?;
        w.write_all(&win.t_final.to_le_bytes())?;
        w.write_all(&win.horizon_s.to_le_bytes())?;
        w.write_all(&(win.len() as u32).to_le_bytes())?;
        for s in &win.steps {
            for v in s.as_array() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        for v in win.label {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

struct Cursor<R> {
    r: R,
}

impl<R: Read> Cursor<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N], FeatureError> {
        let mut buf = [0u8; N];
        self.r
            .read_exact(&mut buf)
            .map_err(|_| FeatureError::Format("truncated window file".into()))?;
        Ok(buf)
    }

    fn u32(&mut self) -> Result<u32, FeatureError> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64, FeatureError> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn i64(&mut self) -> Result<i64, FeatureError> {
        Ok(i64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64, FeatureError> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
}

pub fn read_window_file<R: Read>(r: R) -> Result<Vec<TrainingWindow>, FeatureError> {
    let mut c = Cursor { r };
    if &c.bytes::<4>()? != MAGIC {
        return Err(FeatureError::Format("bad magic".into()));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(FeatureError::Format(format!("unsupported version {version}")));
    }
    let n_windows = c.u64()?;
    let nf = c.u32()? as usize;
    let nl = c.u32()? as usize;
    if nf != N_FEATURES || nl != N_LABEL {
        return Err(FeatureError::Format(format!(
            "unexpected feature widths {nf}/{nl}"
        )));
    }
    let mut out = Vec::with_capacity(n_windows.min(1 << 20) as usize);
    for _ in 0..n_windows {
        let vessel_type = c.u32()?;
        let t_final = c.i64()?;
        let horizon_s = c.f64()?;
        let len = c.u32()? as usize;
        let mut steps = Vec::with_capacity(len);
        for _ in 0..len {
            let mut a = [0.0; N_FEATURES];
            for v in a.iter_mut() {
                *v = c.f64()?;
            }
            steps.push(StepFeature::from_array(a));
        }
        let mut label = [0.0; N_LABEL];
        for v in label.iter_mut() {
            *v = c.f64()?;
        }
        out.push(TrainingWindow {
            vessel_type,
            steps,
            label,
            horizon_s,
            t_final,
        });
    }
    let mut tail = [0u8; 1];
    if c.r.read(&mut tail)? != 0 {
        return Err(FeatureError::Format("trailing bytes after last window".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_windows() -> Vec<TrainingWindow> {
        (0..5)
            .map(|i| TrainingWindow {
                vessel_type: i,
                steps: (0..3 + i as usize)
                    .map(|j| {
                        StepFeature::from_array([
                            j as f64,
                            -(j as f64),
                            0.5,
                            1.25,
                            60.0,
                            61.0,
                        ])
                    })
                    .collect(),
                label: [i as f64 * 10.0, -1.5],
                horizon_s: 300.0 + i as f64,
                t_final: 1000 + i as i64,
            })
            .collect()
    }

    #[test]
    fn round_trip_preserves_everything() {
        let ws = sample_windows();
        let mut buf = Vec::new();
        write_window_file(&mut buf, &ws).unwrap();
        let back = read_window_file(buf.as_slice()).unwrap();
        assert_eq!(back, ws);
    }

    #[test]
    fn truncation_and_bad_magic_rejected() {
        let ws = sample_windows();
        let mut buf = Vec::new();
        write_window_file(&mut buf, &ws).unwrap();
        assert!(read_window_file(&buf[..buf.len() - 3]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_window_file(bad.as_slice()).is_err());
        buf.push(0);
        assert!(read_window_file(buf.as_slice()).is_err());
    }

    #[test]
    fn sidecar_json_round_trip() {
        let side = FeatureSidecar {
            projection: ProjectionRef::new(-4.5, 48.3),
            standardizer: Standardizer {
                feature_mean: [1.0; N_FEATURES],
                feature_scale: [2.0; N_FEATURES],
                label_mean: [0.5, -0.5],
                label_scale: [3.0, 4.0],
            },
            len_min: 18,
            len_max: 32,
        };
        let json = serde_json::to_string(&side).unwrap();
        let back: FeatureSidecar = serde_json::from_str(&json).unwrap();
        assert_eq!(back, side);
    }
}
