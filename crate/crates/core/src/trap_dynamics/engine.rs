use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::text::Float;

use super::{
    DynamicsError, EventRates, Illumination, RateModel, Scenario, TrapState, WavelengthProgram,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Trap,
    Detrap,
    DarkSpike,
    Ionize,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Trap => "trap",
            EventKind::Detrap => "detrap",
            EventKind::DarkSpike => "dark_spike",
            EventKind::Ionize => "ionize",
        }
    }
}

/// State immediately after an event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEvent {
    pub t: f64,
    pub kind: EventKind,
    pub n_trapped: u32,
    pub n_ionized: u32,
    pub shutter_open: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub current: f64,
    pub n_trapped: u32,
    pub n_ionized: u32,
    pub shutter_open: bool,
    pub wavelength: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub seed: u64,
    pub scenario: Scenario,
    pub samples: Vec<Sample>,
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn final_state(&self) -> TrapState {
        let mut s = self.scenario.initial;
        if let Some(e) = self.events.last() {
            s.n_trapped = e.n_trapped;
            s.n_ionized = e.n_ionized;
        }
        s
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    pub fn currents(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.current).collect()
    }

    /// `t_s,I_A,n_trapped,n_ionized,shutter`
    pub fn samples_csv(&self) -> String {
        let mut out = String::from("t_s,I_A,n_trapped,n_ionized,shutter\n");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                Float(s.t),
                Float(s.current),
                s.n_trapped,
                s.n_ionized,
                u8::from(s.shutter_open)
            );
        }
        out
    }

    /// `t_s,kind`
    pub fn events_csv(&self) -> String {
        let mut out = String::from("t_s,kind\n");
        for e in &self.events {
            let _ = writeln!(out, "{},{}", Float(e.t), e.kind.as_str());
        }
        out
    }
}

fn sample_times(duration: f64, dt: f64) -> Vec<f64> {
    let n = (duration / dt + 1e-9).floor() as usize;
    (0..=n).map(|k| k as f64 * dt).collect()
}

fn exponential(rng: &mut ChaCha8Rng, total: f64) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln() / total
}

fn pick(rng: &mut ChaCha8Rng, rates: &EventRates, optical_detrap: f64) -> EventKind {
    let x = rng.random::<f64>() * rates.total();
    if x < rates.trap {
        EventKind::Trap
    } else if x < rates.trap + optical_detrap {
        EventKind::Detrap
    } else if x < rates.trap + rates.detrap {
        EventKind::DarkSpike
    } else {
        EventKind::Ionize
    }
}

fn apply(state: &mut TrapState, kind: EventKind) {
    match kind {
        EventKind::Trap => state.n_trapped += 1,
        EventKind::Detrap | EventKind::DarkSpike => state.n_trapped -= 1,
        EventKind::Ionize => state.n_ionized += 1,
    }
}

/// Epoch boundaries: shutter transitions and, for sweeps, every sample time.
fn epochs(scenario: &Scenario, samples: &[f64]) -> Vec<f64> {
    let d = scenario.duration;
    let mut cuts = vec![0.0, d];
    for (a, b) in scenario.shutter.open_intervals(d) {
        cuts.push(a);
        cuts.push(b);
    }
    if matches!(scenario.program, WavelengthProgram::Sweep { .. }) {
        cuts.extend(samples.iter().copied().filter(|&t| t < d));
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts
}

/// Generates one trace. Identical scenario and seed give an identical trace.
pub fn simulate_trace(scenario: &Scenario, seed: u64) -> Result<Trace, DynamicsError> {
    scenario.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let times = sample_times(scenario.duration, scenario.sample_dt);
    let cuts = epochs(scenario, &times);
    let mut state = scenario.initial;
    let mut samples = Vec::with_capacity(times.len());
    let mut events = Vec::new();
    let mut next_sample = 0;

    let mut emit_until =
        |until: f64, inclusive: bool, state: &TrapState, samples: &mut Vec<Sample>| {
            while next_sample < times.len()
                && (times[next_sample] < until || (inclusive && times[next_sample] <= until))
            {
                let t = times[next_sample];
                samples.push(Sample {
                    t,
                    current: scenario.current(state),
                    n_trapped: state.n_trapped,
                    n_ionized: state.n_ionized,
                    shutter_open: scenario.shutter.is_open(t),
                    wavelength: scenario.wavelength_at(t),
                });
                next_sample += 1;
            }
        };

    for w in cuts.windows(2) {
        let (start, end) = (w[0], w[1]);
        let open = scenario.shutter.is_open(0.5 * (start + end));
        let lambda = scenario.wavelength_at(start);
        let photons = if open {
            scenario.light.absorbed_rate
        } else {
            0.0
        };
        let mut t = start;
        loop {
            let rates = scenario.rates.rates(&state, lambda, photons);
            let total = rates.total();
            let dt = if total > 0.0 {
                exponential(&mut rng, total)
            } else {
                f64::INFINITY
            };
            if t + dt >= end {
                break;
            }
            t += dt;
            emit_until(t, false, &state, &mut samples);
            let optical = if state.n_trapped > 0 {
                scenario.rates.detrap_rate(lambda, photons)
            } else {
                0.0
            };
            let kind = pick(&mut rng, &rates, optical);
            apply(&mut state, kind);
            events.push(TraceEvent {
                t,
                kind,
                n_trapped: state.n_trapped,
                n_ionized: state.n_ionized,
                shutter_open: open,
            });
        }
        emit_until(end, false, &state, &mut samples);
    }
    emit_until(scenario.duration, true, &state, &mut samples);

    Ok(Trace {
        seed,
        scenario: scenario.clone(),
        samples,
        events,
    })
}

/// Runs one trace per seed in parallel; the result is ordered by seed.
pub fn run_ensemble(scenario: &Scenario, seeds: &[u64]) -> Result<Vec<Trace>, DynamicsError> {
    scenario.validate()?;
    let mut traces = seeds
        .par_iter()
        .map(|&s| simulate_trace(scenario, s))
        .collect::<Result<Vec<_>, _>>()?;
    traces.sort_by_key(|t| t.seed);
    Ok(traces)
}

/// Time-weighted state occupancy over `n_events` events under constant
/// illumination, indexed like [`TrapState::index`].
pub fn long_run_occupancy(
    rates: &RateModel,
    light: &Illumination,
    initial: TrapState,
    n_events: usize,
    seed: u64,
) -> Result<Vec<f64>, DynamicsError> {
    rates.validate()?;
    if !initial.is_valid() {
        return Err(DynamicsError::InvalidConfig(
            "initial state out of bounds".into(),
        ));
    }
    let count = initial.state_count();
    if count > 1_000_000 {
        return Err(DynamicsError::StateSpaceTooLarge(count));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut time = vec![0.0; count];
    let mut state = initial;
    for _ in 0..n_events {
        let r = rates.rates(&state, light.wavelength, light.absorbed_rate);
        let total = r.total();
        if total <= 0.0 {
            break;
        }
        time[state.index()] += exponential(&mut rng, total);
        let optical = if state.n_trapped > 0 {
            rates.detrap_rate(light.wavelength, light.absorbed_rate)
        } else {
            0.0
        };
        apply(&mut state, pick(&mut rng, &r, optical));
    }
    let sum: f64 = time.iter().sum();
    if sum > 0.0 {
        time.iter_mut().for_each(|x| *x /= sum);
    } else {
        time[state.index()] = 1.0;
    }
    Ok(time)
}
