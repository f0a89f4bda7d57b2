//! Fermi–Dirac filling of 2D subbands.

use super::Subband;
use crate::constants::{DOS2D_PER_M0, K_B, PER_NM_TO_PER_CM};

/// ln(1 + eˣ) without overflow.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Logistic 1/(1 + e⁻ˣ), the derivative of [`softplus`].
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Sheet density of one subband at the given effective mass, cm⁻².
pub fn sheet_density(energy: f64, fermi_level: f64, temperature: f64, mass: f64) -> f64 {
    let kt = K_B * temperature;
    DOS2D_PER_M0 * mass * kt * softplus((fermi_level - energy) / kt)
}

/// Fills `subbands` with Fermi–Dirac sheet densities and returns the electron
/// volume density n(z) in cm⁻³. The density-of-states mass of each subband
/// is the envelope-weighted mass.
pub fn subband_density(
    subbands: &mut [Subband],
    fermi_level: f64,
    temperature: f64,
    mass: &[f64],
    dz: f64,
) -> Vec<f64> {
    assert!(temperature > 0.0);
    let mut n = vec![0.0; mass.len()];
    for s in subbands.iter_mut() {
        let m_star = s.expectation(mass, dz);
        s.sheet_density = sheet_density(s.energy, fermi_level, temperature, m_star);
        if s.sheet_density > 0.0 {
            let scale = s.sheet_density * PER_NM_TO_PER_CM;
            n.iter_mut()
                .zip(&s.psi)
                .for_each(|(ni, p)| *ni += scale * p * p);
        }
    }
    n
}
