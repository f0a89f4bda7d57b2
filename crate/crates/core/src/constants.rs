//! Physical constants in the unit system used throughout the crate
//! (energies in eV, lengths in nm, densities in cm^-3 / cm^-2).

/// Planck constant times speed of light, eV·µm.
pub const HC_EV_UM: f64 = 1.239_841_984;

/// ħ²/(2 m0), eV·nm².
pub const HBAR2_OVER_2M0: f64 = 0.038_099_821_2;

/// Boltzmann constant, eV/K.
pub const K_B: f64 = 8.617_333_262e-5;

/// Elementary charge, C.
pub const Q_E: f64 = 1.602_176_634e-19;

/// Vacuum permittivity, F/m.
pub const EPS_0: f64 = 8.854_187_812_8e-12;

/// Free-electron mass, kg.
pub const M_0: f64 = 9.109_383_701_5e-31;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Two-dimensional density of states per unit effective mass, m0/(πħ²),
/// in cm⁻² eV⁻¹.
pub const DOS2D_PER_M0: f64 = M_0 / (std::f64::consts::PI * HBAR * HBAR) * Q_E * 1e-4;

/// q/ε0 expressed so that `POISSON_SCALE * N[cm⁻³]` is a curvature in V/nm².
pub const POISSON_SCALE: f64 = Q_E * 1e6 / EPS_0 * 1e-18;

/// |ψ|² in nm⁻¹ to cm⁻¹.
pub const PER_NM_TO_PER_CM: f64 = 1e7;
