use super::{FeatureError, TrainingWindow};

/// Splits windows by the wall clock of their final input point: the first
/// `train_frac` of the covered time span goes to train, the next `val_frac`
/// to validation, the rest to test. Windows on a boundary fall into the
/// later split. Defaults elsewhere use 0.50 / 0.25.
pub fn temporal_split(
    windows: Vec<TrainingWindow>,
    train_frac: f64,
    val_frac: f64,
) -> Result<(Vec<TrainingWindow>, Vec<TrainingWindow>, Vec<TrainingWindow>), FeatureError> {
    if !(train_frac > 0.0 && val_frac > 0.0 && train_frac + val_frac < 1.0) {
        return Err(FeatureError::BadSplit(train_frac, val_frac));
    }
    if windows.is_empty() {
        return Ok((Vec::new(), Vec::new(), Vec::new()));
    }
    let t_min = windows.iter().map(|w| w.t_final).min().unwrap();
    let t_max = windows.iter().map(|w| w.t_final).max().unwrap();
    let span = (t_max - t_min) as f64;
    let cut1 = t_min as f64 + train_frac * span;
    let cut2 = t_min as f64 + (train_frac + val_frac) * span;

    let mut train = Vec::new();
    let mut val = Vec::new();
    let mut test = Vec::new();
    for w in windows {
        let t = w.t_final as f64;
        if t < cut1 {
            train.push(w);
        } else if t < cut2 {
            val.push(w);
        } else {
            test.push(w);
        }
    }
    Ok((train, val, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::StepFeature;

    fn window_at(t_final: i64) -> TrainingWindow {
        TrainingWindow {
            vessel_type: 0,
            steps: vec![StepFeature::from_array([0.0; 6]); 3],
            label: [0.0, 0.0],
            horizon_s: 60.0,
            t_final,
        }
    }

    #[test]
    fn fifty_twentyfive_twentyfive_by_time() {
        // relative positions 0.0, 0.1, 0.4, 0.6, 0.9, 1.0 over a 1000 s span
        let ws: Vec<TrainingWindow> =
            [0, 100, 400, 600, 900, 1000].iter().map(|&t| window_at(t)).collect();
        let (train, val, test) = temporal_split(ws, 0.5, 0.25).unwrap();
        let ts = |v: &[TrainingWindow]| v.iter().map(|w| w.t_final).collect::<Vec<_>>();
        assert_eq!(ts(&train), vec![0, 100, 400]);
        assert_eq!(ts(&val), vec![600]);
        assert_eq!(ts(&test), vec![900, 1000]);
    }

    #[test]
    fn boundary_goes_to_later_split() {
        // cut1 = 500 exactly: the window at 500 lands in val
        let ws: Vec<TrainingWindow> = [0, 500, 1000].iter().map(|&t| window_at(t)).collect();
        let (train, val, test) = temporal_split(ws, 0.5, 0.25).unwrap();
        assert_eq!(train.len(), 1);
        assert_eq!(val.len(), 1);
        assert_eq!(val[0].t_final, 500);
        assert_eq!(test.len(), 1);
    }

    #[test]
    fn empty_input_gives_three_empty_splits() {
        let (a, b, c) = temporal_split(Vec::new(), 0.5, 0.25).unwrap();
        assert!(a.is_empty() && b.is_empty() && c.is_empty());
    }

    #[test]
    fn bad_fractions_rejected() {
        assert!(temporal_split(vec![window_at(0)], 0.0, 0.25).is_err());
        assert!(temporal_split(vec![window_at(0)], 0.8, 0.2).is_err());
        assert!(temporal_split(vec![window_at(0)], 0.5, -0.1).is_err());
    }

    #[test]
    fn partition_is_exact() {
        let ws: Vec<TrainingWindow> = (0..101).map(|i| window_at(i * 13)).collect();
        let n = ws.len();
        let (a, b, c) = temporal_split(ws, 0.5, 0.25).unwrap();
        assert_eq!(a.len() + b.len() + c.len(), n);
        let max_train = a.iter().map(|w| w.t_final).max().unwrap();
        let min_val = b.iter().map(|w| w.t_final).min().unwrap();
        let max_val = b.iter().map(|w| w.t_final).max().unwrap();
        let min_test = c.iter().map(|w| w.t_final).min().unwrap();
        assert!(max_train < min_val);
        assert!(max_val < min_test);
    }
}
