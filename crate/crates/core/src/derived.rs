//! Device figures of merit computed from a converged band diagram:
//! envelope-averaged g-factor, WKB tunneling lifetime, interband wavelength
//! and the illumination photon budget.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{HBAR, HC_EV_UM, M_0, Q_E};
use crate::schrodinger_poisson::{SolveResult, Subband};
use crate::stack::Grid;

#[derive(Debug, Error, PartialEq)]
pub enum DerivedError {
    #[error("no {carrier} state with more than half its weight in layer {layer}")]
    NoBoundState { carrier: &'static str, layer: usize },
    #[error("layer index {0} out of range")]
    NoSuchLayer(usize),
}

/// Probability weight of `subband` in each layer of `grid`.
pub fn layer_weights(subband: &Subband, grid: &Grid) -> Vec<f64> {
    grid.layer_nodes
        .iter()
        .map(|r| subband.weight_in(r.clone(), grid.dz))
        .collect()
}

/// Envelope-averaged electron g-factor, Σ g_layer · w_layer.
pub fn effective_g(subband: &Subband, grid: &Grid) -> f64 {
    subband.expectation(&grid.g_e, grid.dz)
}

/// WKB transmission exp(−2∫κ dz) through the classically forbidden part of
/// `ec` at energy `energy` (eV). Cell `[z_i, z_{i+1}]` carries the band edge
/// and mass of node `i`, matching the grid convention, so abrupt steps are
/// integrated exactly.
pub fn wkb_transmission(ec: &[f64], mass: &[f64], dz: f64, energy: f64) -> f64 {
    (-2.0 * wkb_exponent(ec, mass, dz, energy)).exp()
}

/// ∫κ dz (dimensionless) over the forbidden cells.
pub fn wkb_exponent(ec: &[f64], mass: &[f64], dz: f64, energy: f64) -> f64 {
    let n = ec.len();
    let cells = n.saturating_sub(1);
    (0..cells)
        .filter(|&i| ec[i] > energy)
        .map(|i| kappa(mass[i], ec[i] - energy) * dz)
        .sum()
}

/// Decay constant √(2 m ΔE)/ħ in nm⁻¹.
fn kappa(mass: f64, barrier: f64) -> f64 {
    (2.0 * mass * M_0 * barrier * Q_E).sqrt() / HBAR * 1e-9
}

/// Attempt-frequency convention used for tunneling lifetimes.
pub const ATTEMPT_CONVENTION: &str = "f = v/(2L), v = sqrt(2E/m)";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TunnelingTime {
    /// s; `f64::INFINITY` when the transmission underflows to zero.
    pub tau: f64,
    /// Hz.
    pub attempt_frequency: f64,
    pub transmission: f64,
}

/// Lifetime 1/(f·T) of a particle bouncing in a well of width `well_width`
/// (nm) with kinetic energy `energy` (eV) above the well bottom.
pub fn tunneling_time(
    well_width: f64,
    well_mass: f64,
    energy: f64,
    transmission: f64,
) -> TunnelingTime {
    let v = (2.0 * energy * Q_E / (well_mass * M_0)).sqrt();
    let f = v / (2.0 * well_width * 1e-9);
    let tau = if transmission > 0.0 {
        1.0 / (f * transmission)
    } else {
        f64::INFINITY
    };
    TunnelingTime {
        tau,
        attempt_frequency: f,
        transmission,
    }
}

/// Tunneling of the lowest electron state localized in `from_layer` through
/// the layers between it and `to_layer`.
pub fn well_escape_time(
    result: &SolveResult,
    from_layer: usize,
    to_layer: usize,
) -> Result<TunnelingTime, DerivedError> {
    let grid = &result.grid;
    let n_layers = grid.layer_nodes.len();
    for l in [from_layer, to_layer] {
        if l >= n_layers {
            return Err(DerivedError::NoSuchLayer(l));
        }
    }
    let state = result
        .electron_state_in(from_layer)
        .ok_or(DerivedError::NoBoundState {
            carrier: "electron",
            layer: from_layer,
        })?;
    let well = grid.nodes_of_layer(from_layer);
    let target = grid.nodes_of_layer(to_layer);
    let barrier = if from_layer < to_layer {
        well.end..target.start + 1
    } else {
        target.end..well.start + 1
    };
    let ec = &result.profile.ec;
    let transmission = wkb_transmission(
        &ec[barrier.clone()],
        &grid.m_e[barrier],
        grid.dz,
        state.energy,
    );
    let bottom = ec[well.clone()]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let width = well.len() as f64 * grid.dz;
    Ok(tunneling_time(
        width,
        grid.m_e[well.start],
        state.energy - bottom,
        transmission,
    ))
}

/// Electron and heavy-hole confinement energies of the lowest states
/// localized in `layer`, measured from the layer-averaged band edges, eV.
pub fn confinement_energies(
    result: &SolveResult,
    layer: usize,
) -> Result<(f64, f64), DerivedError> {
    let grid = &result.grid;
    if layer >= grid.layer_nodes.len() {
        return Err(DerivedError::NoSuchLayer(layer));
    }
    let nodes = grid.nodes_of_layer(layer);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let ec = mean(&result.profile.ec[nodes.clone()]);
    let ev = mean(&result.profile.ev[nodes]);
    let e = result
        .electron_state_in(layer)
        .ok_or(DerivedError::NoBoundState {
            carrier: "electron",
            layer,
        })?;
    let h = result
        .hole_state_in(layer)
        .ok_or(DerivedError::NoBoundState {
            carrier: "heavy-hole",
            layer,
        })?;
    // Hole energies are stored on the inverted scale.
    Ok((e.energy - ec, h.energy + ev))
}

/// Wavelength (µm) of the e1–hh1 transition of the well in `layer`,
/// hc / (Eg + E_e1 + E_hh1).
pub fn interband_wavelength(result: &SolveResult, layer: usize) -> Result<f64, DerivedError> {
    let (e_conf, h_conf) = confinement_energies(result, layer)?;
    let gap = result.grid.e_g[result.grid.nodes_of_layer(layer).start];
    Ok(HC_EV_UM / (gap + e_conf + h_conf))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BeamProfile {
    Gaussian,
    Uniform,
}

/// Illumination spot and collection window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamGeometry {
    /// Spot diameter, µm. For a Gaussian profile this is the 1/e² intensity
    /// diameter.
    #[serde(rename = "spot_diameter_um")]
    pub spot_diameter: f64,
    /// µm.
    #[serde(rename = "window_diameter_um")]
    pub window_diameter: f64,
    pub profile: BeamProfile,
}

impl BeamGeometry {
    /// 5 mm Gaussian spot on the 1 µm gate window.
    pub fn reference() -> Self {
        Self {
            spot_diameter: 5000.0,
            window_diameter: 1.0,
            profile: BeamProfile::Gaussian,
        }
    }

    /// Window area, cm².
    pub fn window_area(&self) -> f64 {
        let r_cm = 0.5 * self.window_diameter * 1e-4;
        std::f64::consts::PI * r_cm * r_cm
    }
}

/// Fraction of the total beam power falling inside the window.
pub fn window_power_fraction(beam: &BeamGeometry) -> f64 {
    let ratio = beam.window_diameter / beam.spot_diameter;
    match beam.profile {
        BeamProfile::Uniform => (ratio * ratio).min(1.0),
        BeamProfile::Gaussian => {
            // 1 − exp(−2 r²/w²) with r, w the window and 1/e² beam radii.
            -(-2.0 * ratio * ratio).exp_m1()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhotonBudget {
    /// Photons/s reaching the window.
    pub incident_rate_in_window: f64,
    pub absorptivity: f64,
    /// Photons/s absorbed in the absorption layer.
    pub absorbed_rate: f64,
}

impl PhotonBudget {
    pub fn from_incident(incident_rate_in_window: f64, absorptivity: f64) -> Self {
        Self {
            incident_rate_in_window,
            absorptivity,
            absorbed_rate: incident_rate_in_window * absorptivity,
        }
    }
}

/// Photon budget for total optical power `power` (W) at `wavelength` (µm).
pub fn absorbed_photon_rate(
    power: f64,
    wavelength: f64,
    fraction: f64,
    absorptivity: f64,
) -> PhotonBudget {
    let photon_energy = HC_EV_UM / wavelength * Q_E;
    PhotonBudget::from_incident(power * fraction / photon_energy, absorptivity)
}
