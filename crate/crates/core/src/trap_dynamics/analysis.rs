use super::{EventKind, Trace, TrapState};

/// Distinct sampled current values, ascending.
pub fn distinct_levels(trace: &Trace) -> Vec<f64> {
    let mut v = trace.currents();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Trap occupancy changes that happened with the shutter closed.
pub fn events_while_closed(trace: &Trace) -> usize {
    trace
        .events
        .iter()
        .filter(|e| !e.shutter_open && e.kind != EventKind::Ionize)
        .count()
}

/// `(openings, openings with at least one trap occupancy change)`, over
/// openings that end within the trace.
pub fn openings_with_change(trace: &Trace) -> (usize, usize) {
    let sc = &trace.scenario;
    let mut total = 0;
    let mut changed = 0;
    for (a, b) in sc.shutter.open_intervals(sc.duration) {
        if b - a < sc.shutter.open_duration.min(sc.duration) - 1e-9 {
            continue;
        }
        total += 1;
        if trace
            .events
            .iter()
            .any(|e| e.t >= a && e.t < b && e.kind != EventKind::Ionize)
        {
            changed += 1;
        }
    }
    (total, changed)
}

/// Per-sample median across traces of equal length.
pub fn ensemble_median(traces: &[Trace]) -> Vec<f64> {
    let len = traces.iter().map(|t| t.samples.len()).min().unwrap_or(0);
    (0..len)
        .map(|k| {
            let mut col: Vec<f64> = traces.iter().map(|t| t.samples[k].current).collect();
            col.sort_by(f64::total_cmp);
            let m = col.len();
            if m % 2 == 1 {
                col[m / 2]
            } else {
                0.5 * (col[m / 2 - 1] + col[m / 2])
            }
        })
        .collect()
}

/// Index of the first minimum.
pub fn first_argmin(values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// Shape of a photo-induced current staircase.
#[derive(Debug, Clone, PartialEq)]
pub struct StaircaseSummary {
    /// Current before the first event, A.
    pub initial_current: f64,
    /// `(time, current after)` for every event up to pinch-off.
    pub steps: Vec<(f64, f64)>,
    /// First time the current falls below `pinch_ratio` of the initial value.
    pub pinch_time: Option<f64>,
    /// Every step up to pinch-off lowered the current by one trapped electron.
    pub monotone: bool,
}

impl StaircaseSummary {
    pub fn from_trace(trace: &Trace, pinch_ratio: f64) -> Self {
        let sc = &trace.scenario;
        let i0 = sc.current(&sc.initial);
        let mut steps = Vec::new();
        let mut monotone = true;
        let mut pinch_time = None;
        let mut prev = i0;
        let mut prev_trapped = sc.initial.n_trapped;
        for e in &trace.events {
            let state = TrapState {
                n_trapped: e.n_trapped,
                n_ionized: e.n_ionized,
                ..sc.initial
            };
            let i = sc.current(&state);
            monotone &= i <= prev && e.n_trapped == prev_trapped + 1;
            steps.push((e.t, i));
            prev = i;
            prev_trapped = e.n_trapped;
            if i < pinch_ratio * i0 {
                pinch_time = Some(e.t);
                break;
            }
        }
        Self {
            initial_current: i0,
            steps,
            pinch_time,
            monotone,
        }
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trap_dynamics::{balanced_switching, simulate_trace, staircase};

    #[test]
    fn argmin_and_median() {
        assert_eq!(first_argmin(&[3.0, 1.0, 1.0, 2.0]), Some(1));
        assert_eq!(first_argmin(&[]), None);
    }

    #[test]
    fn staircase_pinches() {
        let tr = simulate_trace(&staircase(), 7).unwrap();
        let s = StaircaseSummary::from_trace(&tr, 0.01);
        assert!(s.monotone);
        assert!(s.pinch_time.is_some());
        assert!(s.step_count() >= 3);
    }

    #[test]
    fn balanced_two_levels() {
        let tr = simulate_trace(&balanced_switching(), 2).unwrap();
        assert_eq!(distinct_levels(&tr).len(), 2);
        assert_eq!(events_while_closed(&tr), 0);
        let (n, changed) = openings_with_change(&tr);
        assert_eq!(n, 20);
        assert!(changed > 0);
    }
}
