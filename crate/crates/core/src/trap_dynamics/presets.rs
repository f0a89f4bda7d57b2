use serde::{Deserialize, Serialize};

use super::{
    ChannelCalibration, Illumination, RateModel, Scenario, ShutterSchedule, TrapState,
    WavelengthProgram,
};

/// Ready-made scenarios for the three measurement modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Staircase,
    StaircaseCaptionRate,
    Sweep,
    Balanced,
}

impl Preset {
    pub fn scenario(self) -> Scenario {
        match self {
            Preset::Staircase => staircase(),
            Preset::StaircaseCaptionRate => staircase_caption_rate(),
            Preset::Sweep => spectral_sweep(),
            Preset::Balanced => balanced_switching(),
        }
    }
}

/// Fully soaked device, biased just above threshold, under continuous
/// 1.3 µm light absorbing one photon per second: each trapped photoelectron
/// lowers the current by a discrete step until the channel pinches off.
pub fn staircase() -> Scenario {
    let cal = ChannelCalibration::default();
    let (channel, gate_bias) = cal.calibrate();
    Scenario {
        rates: RateModel::default(),
        channel,
        gate_bias,
        light: Illumination {
            wavelength: 1.3,
            absorbed_rate: 1.0,
        },
        program: WavelengthProgram::Fixed,
        shutter: ShutterSchedule::always_open(),
        initial: TrapState::new(cal.pinch_count, cal.donor_total).with_ionized(cal.donor_total),
        duration: 600.0,
        sample_dt: 0.1,
    }
}

/// [`staircase`] at 0.3 absorbed photons per second, run twice as long.
pub fn staircase_caption_rate() -> Scenario {
    let mut s = staircase();
    s.light.absorbed_rate = 0.3;
    s.duration = 1200.0;
    s
}

/// Wavelength swept from 1.0 to 1.8 µm in 80 s on a half-soaked device
/// biased well above threshold.
pub fn spectral_sweep() -> Scenario {
    let cal = ChannelCalibration::default();
    let (channel, _) = cal.calibrate();
    let initial = TrapState::new(200, cal.donor_total).with_ionized(cal.donor_total / 2);
    let gate_bias = cal.v_th_dark + cal.soak_shift / 2.0 + 0.2;
    Scenario {
        rates: RateModel::default(),
        channel,
        gate_bias,
        light: Illumination {
            wavelength: 1.0,
            absorbed_rate: 10.0,
        },
        program: WavelengthProgram::Sweep {
            start_um: 1.0,
            end_um: 1.8,
        },
        shutter: ShutterSchedule::always_open(),
        initial,
        duration: 80.0,
        sample_dt: 0.1,
    }
}

/// Single-electron trap at the absorption edge, where filling and emptying
/// rates balance, with a 10 s shutter opening every 50 s.
pub fn balanced_switching() -> Scenario {
    let cal = ChannelCalibration::default();
    let (channel, _) = cal.calibrate();
    let rates = RateModel {
        ionize_efficiency: 0.0,
        ..RateModel::default()
    };
    // Partial soak: threshold a little below zero gate bias.
    let n_ionized = ((cal.v_th_dark + cal.overdrive) / -channel.dvth_ion).round() as u32;
    Scenario {
        rates,
        channel,
        gate_bias: 0.0,
        light: Illumination {
            wavelength: rates.lambda_gap,
            absorbed_rate: 3.0,
        },
        program: WavelengthProgram::Fixed,
        shutter: ShutterSchedule::periodic(10.0, 50.0),
        initial: TrapState::new(1, cal.donor_total).with_ionized(n_ionized),
        duration: 1000.0,
        sample_dt: 0.1,
    }
}
