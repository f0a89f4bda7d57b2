//! Stochastic single-photoelectron trap dynamics and the channel current it
//! modulates.
//!
//! The state is a pair of integers: electrons held in the window trap of the
//! absorption well, and photo-ionized donors in the modulation-doping layer.
//! Above-gap photons fill the trap, sub-gap photons empty it and ionize
//! donors. Traces are generated with an exact event-driven (Gillespie)
//! engine whose rates are frozen between shutter transitions and, for
//! wavelength sweeps, between sample instants.

mod analysis;
mod channel;
mod engine;
mod master;
mod presets;

pub use analysis::{
    distinct_levels, ensemble_median, events_while_closed, first_argmin, openings_with_change,
    StaircaseSummary,
};
pub use channel::{channel_current, ChannelCalibration, ChannelModel};
pub use engine::{
    long_run_occupancy, run_ensemble, simulate_trace, EventKind, Sample, Trace, TraceEvent,
};
pub use master::{master_equation_steady_state, MarkovChain, StationaryDistribution};
pub use presets::{balanced_switching, spectral_sweep, staircase, staircase_caption_rate, Preset};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("invalid shutter schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid dynamics configuration: {0}")]
    InvalidConfig(String),
    #[error("state space of {0} states is too large to enumerate")]
    StateSpaceTooLarge(usize),
    #[error("rate matrix of recurrent class {0:?} is singular")]
    SingularChain(Vec<usize>),
}

/// Occupation of the window trap and of the donor layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapState {
    pub n_trapped: u32,
    pub n_ionized: u32,
    /// Maximum number of trapped electrons.
    pub capacity: u32,
    pub donor_total: u32,
}

impl TrapState {
    pub fn new(capacity: u32, donor_total: u32) -> Self {
        Self {
            n_trapped: 0,
            n_ionized: 0,
            capacity,
            donor_total,
        }
    }

    pub fn with_ionized(mut self, n: u32) -> Self {
        self.n_ionized = n;
        self
    }

    pub fn with_trapped(mut self, n: u32) -> Self {
        self.n_trapped = n;
        self
    }

    pub fn is_valid(&self) -> bool {
        self.n_trapped <= self.capacity && self.n_ionized <= self.donor_total
    }

    /// Dense index over the (capacity + 1) × (donor_total + 1) state space.
    pub fn index(&self) -> usize {
        self.n_ionized as usize * (self.capacity as usize + 1) + self.n_trapped as usize
    }

    pub fn state_count(&self) -> usize {
        (self.capacity as usize + 1) * (self.donor_total as usize + 1)
    }

    pub fn from_index(&self, index: usize) -> Self {
        let cols = self.capacity as usize + 1;
        Self {
            n_trapped: (index % cols) as u32,
            n_ionized: (index / cols) as u32,
            ..*self
        }
    }
}

/// Light reaching the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Illumination {
    /// µm.
    #[serde(rename = "wavelength_um")]
    pub wavelength: f64,
    /// Photons/s absorbed in the absorption layer for above-gap light; all
    /// optical processes scale with it.
    #[serde(rename = "absorbed_rate_per_s")]
    pub absorbed_rate: f64,
}

/// Wavelength-dependent event rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateModel {
    /// Interband absorption edge, µm. The default is the edge of the shipped
    /// reference stack as solved with the built-in material table.
    #[serde(rename = "lambda_gap_um")]
    pub lambda_gap: f64,
    /// Half-width of the cosine crossover around the edge, µm.
    #[serde(rename = "edge_width_um")]
    pub edge_width: f64,
    /// Trapped electrons per absorbed above-gap photon.
    pub trap_efficiency: f64,
    /// Trap neutralizations per photon for sub-gap light.
    pub detrap_efficiency: f64,
    /// Donor ionizations per photon per neutral donor for sub-gap light.
    pub ionize_efficiency: f64,
    /// Spontaneous neutralization of an occupied trap, /s.
    #[serde(rename = "dark_spike_rate_per_s")]
    pub dark_spike_rate: f64,
}

impl Default for RateModel {
    fn default() -> Self {
        Self {
            lambda_gap: 1.32,
            edge_width: 0.02,
            trap_efficiency: 0.1,
            detrap_efficiency: 0.1,
            ionize_efficiency: 5e-4,
            dark_spike_rate: 0.0,
        }
    }
}

/// Per-event rates in one state, /s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EventRates {
    pub trap: f64,
    pub detrap: f64,
    pub ionize: f64,
}

impl EventRates {
    pub fn total(&self) -> f64 {
        self.trap + self.detrap + self.ionize
    }
}

impl RateModel {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let fields = [
            ("lambda_gap_um", self.lambda_gap),
            ("edge_width_um", self.edge_width),
            ("trap_efficiency", self.trap_efficiency),
            ("detrap_efficiency", self.detrap_efficiency),
            ("ionize_efficiency", self.ionize_efficiency),
            ("dark_spike_rate_per_s", self.dark_spike_rate),
        ];
        for (name, v) in fields {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(DynamicsError::InvalidConfig(format!(
                    "{name} must be finite and >= 0"
                )));
            }
        }
        if !(self.lambda_gap > 0.0) {
            return Err(DynamicsError::InvalidConfig(
                "lambda_gap_um must be > 0".into(),
            ));
        }
        Ok(())
    }

    /// Weight of interband (above-gap) absorption at `wavelength`: 1 well
    /// below the edge, 0 well above, cosine crossover within ±edge_width.
    pub fn above_gap_weight(&self, wavelength: f64) -> f64 {
        let x = wavelength - self.lambda_gap;
        if x <= -self.edge_width {
            1.0
        } else if x >= self.edge_width {
            0.0
        } else {
            0.5 * (1.0 - (0.5 * std::f64::consts::PI * x / self.edge_width).sin())
        }
    }

    pub fn trap_rate(&self, wavelength: f64, photon_rate: f64) -> f64 {
        photon_rate * self.trap_efficiency * self.above_gap_weight(wavelength)
    }

    /// Optical neutralization rate of an occupied trap (excluding dark spikes).
    pub fn detrap_rate(&self, wavelength: f64, photon_rate: f64) -> f64 {
        photon_rate * self.detrap_efficiency * (1.0 - self.above_gap_weight(wavelength))
    }

    /// Ionization rate per neutral donor.
    pub fn ionize_rate(&self, wavelength: f64, photon_rate: f64) -> f64 {
        photon_rate * self.ionize_efficiency * (1.0 - self.above_gap_weight(wavelength))
    }

    /// Rates out of `state` with `photon_rate` absorbed-equivalent photons/s.
    pub fn rates(&self, state: &TrapState, wavelength: f64, photon_rate: f64) -> EventRates {
        let trap = if state.n_trapped < state.capacity {
            self.trap_rate(wavelength, photon_rate)
        } else {
            0.0
        };
        let detrap = if state.n_trapped > 0 {
            self.detrap_rate(wavelength, photon_rate) + self.dark_spike_rate
        } else {
            0.0
        };
        let neutral = f64::from(state.donor_total - state.n_ionized);
        EventRates {
            trap,
            detrap,
            ionize: self.ionize_rate(wavelength, photon_rate) * neutral,
        }
    }
}

/// Periodic shutter: open for `open_duration` at the start of every
/// `period`, beginning at `t_start`, for `total_time` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShutterSchedule {
    #[serde(rename = "period_s")]
    pub period: f64,
    #[serde(rename = "open_duration_s")]
    pub open_duration: f64,
    #[serde(rename = "t_start_s")]
    pub t_start: f64,
    #[serde(rename = "total_time_s")]
    pub total_time: f64,
}

impl ShutterSchedule {
    pub fn always_open() -> Self {
        Self {
            period: 1.0,
            open_duration: 1.0,
            t_start: 0.0,
            total_time: f64::INFINITY,
        }
    }

    pub fn never_open() -> Self {
        Self {
            period: 1.0,
            open_duration: 1.0,
            t_start: f64::INFINITY,
            total_time: 0.0,
        }
    }

    pub fn periodic(open_duration: f64, period: f64) -> Self {
        Self {
            period,
            open_duration,
            t_start: 0.0,
            total_time: f64::INFINITY,
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.period > 0.0) || !self.period.is_finite() {
            return Err(DynamicsError::InvalidSchedule("period must be > 0".into()));
        }
        if !(self.open_duration > 0.0 && self.open_duration <= self.period) {
            return Err(DynamicsError::InvalidSchedule(
                "open duration must lie in (0, period]".into(),
            ));
        }
        if !(self.t_start >= 0.0) || !(self.total_time >= 0.0) {
            return Err(DynamicsError::InvalidSchedule(
                "t_start and total_time must be >= 0".into(),
            ));
        }
        Ok(())
    }

    /// Open intervals intersecting `[0, horizon)`.
    pub fn open_intervals(&self, horizon: f64) -> Vec<(f64, f64)> {
        let end = (self.t_start + self.total_time).min(horizon);
        let mut out = Vec::new();
        if !(self.t_start < end) {
            return out;
        }
        if self.open_duration >= self.period {
            out.push((self.t_start, end));
            return out;
        }
        let mut k = 0u64;
        loop {
            let a = self.t_start + k as f64 * self.period;
            if a >= end {
                break;
            }
            out.push((a, (a + self.open_duration).min(end)));
            k += 1;
        }
        out
    }

    pub fn is_open(&self, t: f64) -> bool {
        if t < self.t_start || t >= self.t_start + self.total_time {
            return false;
        }
        let phase = (t - self.t_start) % self.period;
        phase < self.open_duration
    }
}

/// Wavelength as a function of time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum WavelengthProgram {
    Fixed,
    /// Linear sweep from `start_um` to `end_um` over the trace duration.
    Sweep {
        start_um: f64,
        end_um: f64,
    },
}

/// Everything needed to generate one trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub rates: RateModel,
    pub channel: ChannelModel,
    #[serde(rename = "gate_bias_V")]
    pub gate_bias: f64,
    pub light: Illumination,
    pub program: WavelengthProgram,
    pub shutter: ShutterSchedule,
    pub initial: TrapState,
    #[serde(rename = "duration_s")]
    pub duration: f64,
    #[serde(rename = "sample_dt_s")]
    pub sample_dt: f64,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        self.rates.validate()?;
        self.channel.validate()?;
        self.shutter.validate()?;
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(DynamicsError::InvalidConfig("duration must be > 0".into()));
        }
        if !(self.sample_dt > 0.0) {
            return Err(DynamicsError::InvalidConfig("sample_dt must be > 0".into()));
        }
        if !self.initial.is_valid() {
            return Err(DynamicsError::InvalidConfig(
                "initial state out of bounds".into(),
            ));
        }
        if !(self.light.absorbed_rate >= 0.0) || !(self.light.wavelength > 0.0) {
            return Err(DynamicsError::InvalidConfig(
                "illumination must be non-negative".into(),
            ));
        }
        if let WavelengthProgram::Sweep { start_um, end_um } = self.program {
            if !(start_um > 0.0 && end_um > 0.0) {
                return Err(DynamicsError::InvalidConfig(
                    "sweep wavelengths must be > 0".into(),
                ));
            }
        }
        Ok(())
    }

    /// Wavelength at time `t`, µm.
    pub fn wavelength_at(&self, t: f64) -> f64 {
        match self.program {
            WavelengthProgram::Fixed => self.light.wavelength,
            WavelengthProgram::Sweep { start_um, end_um } => {
                start_um + (end_um - start_um) * (t / self.duration).clamp(0.0, 1.0)
            }
        }
    }

    pub fn current(&self, state: &TrapState) -> f64 {
        channel_current(&self.channel, self.gate_bias, state)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self, DynamicsError> {
        let s: Self =
            toml::from_str(text).map_err(|e| DynamicsError::InvalidConfig(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }
}
