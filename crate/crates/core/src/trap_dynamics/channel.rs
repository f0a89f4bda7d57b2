use serde::{Deserialize, Serialize};

use super::{DynamicsError, TrapState};
use crate::schrodinger_poisson::softplus;

/// Smoothed threshold model of the HEMT channel in the linear regime:
/// `I = V_sd · G0 · s · softplus((V_g − V_th) / s)`, with a threshold set by
/// the trap and donor charge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelModel {
    /// Transconductance per unit drain bias, S/V.
    #[serde(rename = "g0_S_per_V")]
    pub g0: f64,
    /// Threshold with no trapped electrons and no ionized donors, V.
    #[serde(rename = "v_th0_V")]
    pub v_th0: f64,
    /// Threshold shift per trapped electron, V (positive).
    #[serde(rename = "dvth_trap_V")]
    pub dvth_trap: f64,
    /// Threshold shift per ionized donor, V (negative).
    #[serde(rename = "dvth_ion_V")]
    pub dvth_ion: f64,
    #[serde(rename = "v_sd_V")]
    pub v_sd: f64,
    /// Sub-threshold smoothing voltage, V.
    #[serde(rename = "softness_V")]
    pub softness: f64,
}

impl ChannelModel {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let ok = self.g0 > 0.0
            && self.softness > 0.0
            && self.v_sd.is_finite()
            && self.v_th0.is_finite()
            && self.dvth_trap >= 0.0
            && self.dvth_ion <= 0.0;
        if ok {
            Ok(())
        } else {
            Err(DynamicsError::InvalidConfig(
                "channel needs g0 > 0, softness > 0, dvth_trap >= 0 and dvth_ion <= 0".into(),
            ))
        }
    }

    pub fn threshold(&self, state: &TrapState) -> f64 {
        self.v_th0
            + f64::from(state.n_trapped) * self.dvth_trap
            + f64::from(state.n_ionized) * self.dvth_ion
    }
}

impl Default for ChannelModel {
    fn default() -> Self {
        ChannelCalibration::default().calibrate().0
    }
}

pub fn channel_current(model: &ChannelModel, gate_bias: f64, state: &TrapState) -> f64 {
    let s = model.softness;
    model.v_sd * model.g0 * s * softplus((gate_bias - model.threshold(state)) / s)
}

/// Targets from which a [`ChannelModel`] and its operating gate bias are
/// derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelCalibration {
    /// Current at the operating point with no trapped electrons, A.
    #[serde(rename = "unpinched_current_A")]
    pub unpinched_current: f64,
    /// Gate overdrive above the threshold at the operating point, V.
    #[serde(rename = "overdrive_V")]
    pub overdrive: f64,
    /// Trapped electrons needed to pinch the channel.
    pub pinch_count: u32,
    /// Current ratio counted as pinched off.
    pub pinch_ratio: f64,
    #[serde(rename = "softness_V")]
    pub softness: f64,
    #[serde(rename = "v_sd_V")]
    pub v_sd: f64,
    /// Threshold before illumination, V.
    #[serde(rename = "v_th_dark_V")]
    pub v_th_dark: f64,
    /// Threshold shift with every donor ionized, V.
    #[serde(rename = "soak_shift_V")]
    pub soak_shift: f64,
    pub donor_total: u32,
}

impl Default for ChannelCalibration {
    fn default() -> Self {
        Self {
            unpinched_current: 0.6e-9,
            overdrive: 0.02,
            pinch_count: 8,
            pinch_ratio: 0.005,
            softness: 2e-3,
            v_sd: 0.5e-3,
            v_th_dark: 0.1,
            soak_shift: -0.6,
            donor_total: 2000,
        }
    }
}

impl ChannelCalibration {
    /// Returns the model and the gate bias at which a fully soaked device
    /// carries `unpinched_current` and pinches after `pinch_count` traps.
    pub fn calibrate(&self) -> (ChannelModel, f64) {
        let s = self.softness;
        let x0 = self.overdrive / s;
        let target = self.pinch_ratio * softplus(x0);
        // softplus(x) = target  =>  x = ln(e^target − 1)
        let x_pinch = target.exp_m1().ln();
        let dvth_trap = (x0 - x_pinch) * s / f64::from(self.pinch_count.max(1));
        let g0 = self.unpinched_current / (self.v_sd * s * softplus(x0));
        let model = ChannelModel {
            g0,
            v_th0: self.v_th_dark,
            dvth_trap,
            dvth_ion: self.soak_shift / f64::from(self.donor_total.max(1)),
            v_sd: self.v_sd,
            softness: s,
        };
        let gate_bias = self.v_th_dark + self.soak_shift + self.overdrive;
        (model, gate_bias)
    }
}
