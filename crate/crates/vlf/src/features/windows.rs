use super::{FeatureError, StepFeature, TrainingWindow, TransitionSequence};

/// Cuts semi-overlapping windows of every length in `len_min..=len_max`
/// out of a transition sequence. For length L, starts step by ceil(L/2).
/// A window takes L consecutive transitions as input and the next
/// transition's (dx, dy) as label; windows without a following transition
/// are not emitted. Each step's dt_next is the duration of the transition
/// after it, so the final step's dt_next equals the forecast horizon.
pub fn make_windows(
    seq: &TransitionSequence,
    len_min: usize,
    len_max: usize,
) -> Result<Vec<TrainingWindow>, FeatureError> {
    if len_min < 1 || len_min > len_max {
        return Err(FeatureError::BadWindowBounds(len_min, len_max));
    }
    let n = seq.steps.len();
    let mut out = Vec::new();
    for len in len_min..=len_max {
        let stride = len.div_ceil(2);
        let mut start = 0;
        // need transitions start..start+len as input and start+len as label
        while start + len < n {
            let steps: Vec<StepFeature> = (start..start + len)
                .map(|i| {
                    let tr = &seq.steps[i];
                    StepFeature {
                        dx: tr.dx,
                        dy: tr.dy,
                        dv: tr.dv,
                        dphi: tr.dphi,
                        dt_curr: tr.dt,
                        dt_next: seq.steps[i + 1].dt,
                    }
                })
                .collect();
            let label_tr = &seq.steps[start + len];
            out.push(TrainingWindow {
                vessel_type: seq.vessel_type,
                steps,
                label: [label_tr.dx, label_tr.dy],
                horizon_s: label_tr.dt,
                t_final: seq.steps[start + len - 1].t_end,
            });
            start += stride;
        }
    }
    Ok(out)
}

/// Number of windows `make_windows` emits for a sequence of `n_transitions`.
pub fn window_count(n_transitions: usize, len_min: usize, len_max: usize) -> usize {
    let mut count = 0;
    for len in len_min..=len_max {
        if n_transitions > len {
            let last_start = n_transitions - len - 1;
            count += last_start / len.div_ceil(2) + 1;
        }
    }
    count
}
