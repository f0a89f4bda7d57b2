use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::density::{logistic, softplus, subband_density};
use super::poisson::solve_poisson_nonlinear;
use super::schrodinger::{hamiltonian, indexed_states, localized_in, Subband};
use super::SolveError;
use crate::constants::{DOS2D_PER_M0, K_B, PER_NM_TO_PER_CM};
use crate::materials::MaterialTable;
use crate::stack::{discretize, DeviceStack, Grid, DEFAULT_DZ};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Grid step, nm.
    pub dz: f64,
    /// Convergence threshold on the potential update, eV.
    pub tol_potential: f64,
    pub max_iter: usize,
    /// Under-relaxation factor in (0, 1].
    pub mixing: f64,
    /// Number of lowest electron and heavy-hole states to report.
    pub n_states: usize,
    /// States up to this far above the Fermi level are filled, eV.
    pub fill_window: f64,
    /// Upper bound on the number of filled states per iteration.
    pub max_filled: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dz: DEFAULT_DZ,
            tol_potential: 1e-5,
            max_iter: 500,
            mixing: 0.2,
            n_states: 4,
            fill_window: 0.1,
            max_filled: 400,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |m: &str| Err(SolveError::Config(m.to_string()));
        if !(self.dz > 0.0) {
            return bad("dz must be > 0");
        }
        if !(self.tol_potential > 0.0) {
            return bad("tol_potential must be > 0");
        }
        if !(self.mixing > 0.0 && self.mixing <= 1.0) {
            return bad("mixing must lie in (0, 1]");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be >= 1");
        }
        if !(self.fill_window > 0.0) {
            return bad("fill_window must be > 0");
        }
        Ok(())
    }
}

/// Band edges and electrostatic potential on the grid. Energies are measured
/// from the Fermi level.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialProfile {
    pub ec: Vec<f64>,
    pub ev: Vec<f64>,
    pub phi: Vec<f64>,
}

impl PotentialProfile {
    fn from_phi(grid: &Grid, phi: Vec<f64>) -> Self {
        let ec: Vec<f64> = grid
            .ec_offset
            .iter()
            .zip(&phi)
            .map(|(o, p)| o - p)
            .collect();
        let ev = ec.iter().zip(&grid.e_g).map(|(c, g)| c - g).collect();
        Self { ec, ev, phi }
    }

    /// Band edge seen by heavy holes, −Ev.
    pub fn hole_edge(&self) -> Vec<f64> {
        self.ev.iter().map(|v| -v).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub grid: Grid,
    pub profile: PotentialProfile,
    /// Electron states, energy-ascending: the lowest `n_states`, every filled
    /// state, and the lowest state localized in each well layer.
    pub subbands: Vec<Subband>,
    /// Heavy-hole states on the inverted (−E) scale, ascending in hole
    /// energy; the lowest `n_states` and the lowest state of each hole well.
    pub hole_subbands: Vec<Subband>,
    pub fermi_level: f64,
    /// Electron density, cm⁻³.
    pub n: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Max |φ_solve − φ| per iteration, V.
    pub residual_history: Vec<f64>,
    pub temperature: f64,
}

impl SolveResult {
    /// Electron sheet density held in `layer`, cm⁻².
    pub fn sheet_density_in(&self, layer: usize) -> f64 {
        let nodes = self.grid.nodes_of_layer(layer);
        self.n[nodes].iter().sum::<f64>() * self.grid.dz / PER_NM_TO_PER_CM
    }

    /// Lowest electron state with more than half its weight in `layer`.
    pub fn electron_state_in(&self, layer: usize) -> Option<&Subband> {
        let nodes = self.grid.nodes_of_layer(layer);
        self.subbands
            .iter()
            .find(|s| s.weight_in(nodes.clone(), self.grid.dz) > 0.5)
    }

    /// Lowest heavy-hole state with more than half its weight in `layer`.
    pub fn hole_state_in(&self, layer: usize) -> Option<&Subband> {
        let nodes = self.grid.nodes_of_layer(layer);
        self.hole_subbands
            .iter()
            .find(|s| s.weight_in(nodes.clone(), self.grid.dz) > 0.5)
    }

    /// Field at the substrate end, V/nm.
    pub fn substrate_field(&self) -> f64 {
        let p = &self.profile.phi;
        let n = p.len();
        -(p[n - 1] - p[n - 2]) / self.grid.dz
    }

    /// Largest potential change one more full iteration would apply, eV.
    pub fn reevaluate(&self, config: &SolverConfig) -> Result<f64, SolveError> {
        let (phi_solve, _) = scf_step(
            &self.grid,
            &self.profile.phi,
            self.surface_phi(),
            self.fermi_level,
            self.temperature,
            config,
        )?;
        Ok(config.mixing * max_diff(&phi_solve, &self.profile.phi))
    }

    fn surface_phi(&self) -> f64 {
        self.profile.phi[0]
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Layers whose band edge lies below both neighbours.
fn well_layers(grid: &Grid, edge_offset: impl Fn(usize) -> f64) -> Vec<usize> {
    let n_layers = grid.layer_nodes.len();
    let level = |l: usize| edge_offset(grid.layer_nodes[l].start);
    (1..n_layers.saturating_sub(1))
        .filter(|&l| level(l) < level(l - 1) && level(l) < level(l + 1))
        .collect()
}

/// Lowest `n_states`, states below `ceiling` (capped) and the lowest state
/// localized in each of `wells`, merged by eigenvalue index.
fn collect_states(
    grid: &Grid,
    edge: &[f64],
    mass: &[f64],
    n_states: usize,
    ceiling: Option<f64>,
    max_filled: usize,
    wells: &[usize],
) -> Result<Vec<Subband>, SolveError> {
    let h = hamiltonian(edge, mass, grid.dz)?;
    let mut count = n_states.min(h.len());
    if let Some(c) = ceiling {
        count = count.max(h.count_below(c).min(max_filled));
    }
    let mut states: BTreeMap<usize, Subband> =
        indexed_states(&h, 0..count, grid.dz)?.into_iter().collect();
    let top = edge.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for &layer in wells {
        let nodes = grid.nodes_of_layer(layer);
        if states
            .values()
            .any(|s| s.weight_in(nodes.clone(), grid.dz) > 0.5)
        {
            continue;
        }
        if let Some((k, s)) = localized_in(&h, edge, grid.dz, nodes, 0.5, top, 4000)? {
            states.entry(k).or_insert(s);
        }
    }
    Ok(states.into_values().collect())
}

/// One Schrödinger + predictor Poisson pass. Returns the Poisson solution
/// and the filled electron states of the input potential.
fn scf_step(
    grid: &Grid,
    phi: &[f64],
    phi_surface: f64,
    fermi_level: f64,
    temperature: f64,
    config: &SolverConfig,
) -> Result<(Vec<f64>, Vec<Subband>), SolveError> {
    let profile = PotentialProfile::from_phi(grid, phi.to_vec());
    let h = hamiltonian(&profile.ec, &grid.m_e, grid.dz)?;
    let count = h
        .count_below(fermi_level + config.fill_window)
        .min(config.max_filled);
    let mut states: Vec<Subband> = indexed_states(&h, 0..count, grid.dz)?
        .into_iter()
        .map(|(_, s)| s)
        .collect();
    subband_density(&mut states, fermi_level, temperature, &grid.m_e, grid.dz);

    let kt = K_B * temperature;
    let coeff: Vec<f64> = states
        .iter()
        .map(|s| DOS2D_PER_M0 * s.expectation(&grid.m_e, grid.dz) * PER_NM_TO_PER_CM)
        .collect();
    let offsets: Vec<f64> = states
        .iter()
        .map(|s| (fermi_level - s.energy) / kt)
        .collect();
    // Predictor: subband energies follow the local potential change.
    let electrons = |i: usize, dphi: f64| {
        let mut n = 0.0;
        let mut dn = 0.0;
        for ((s, c), x0) in states.iter().zip(&coeff).zip(&offsets) {
            let w = s.psi[i] * s.psi[i];
            if w == 0.0 {
                continue;
            }
            let x = x0 + dphi / kt;
            n += c * kt * softplus(x) * w;
            dn += c * logistic(x) * w;
        }
        (n, dn)
    };
    let phi_solve = solve_poisson_nonlinear(
        &grid.donors,
        &grid.eps_r,
        grid.dz,
        phi_surface,
        phi,
        electrons,
    )?;
    Ok((phi_solve, states))
}

/// Self-consistent band diagram of `stack`.
///
/// The Fermi level is the energy zero. The surface node is pinned at
/// `Ec = surface_barrier − gate_bias` and the substrate end is field-free.
/// Each iteration fills the electron subbands of the current potential,
/// solves Poisson with a predictor density that lets subband occupations
/// follow the potential, and mixes the result in with `config.mixing`.
pub fn self_consistent_solve(
    stack: &DeviceStack,
    materials: &MaterialTable,
    config: &SolverConfig,
) -> Result<SolveResult, SolveError> {
    config.validate()?;
    let grid = discretize(stack, materials, config.dz)?;
    let fermi_level = 0.0;
    let temperature = stack.temperature;
    let phi_surface = stack.gate_bias - stack.surface_barrier;

    let mut phi = vec![phi_surface; grid.len()];
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_iter {
        iterations += 1;
        let (phi_solve, _) = scf_step(&grid, &phi, phi_surface, fermi_level, temperature, config)?;
        let residual = max_diff(&phi_solve, &phi);
        history.push(residual);
        phi.iter_mut()
            .zip(&phi_solve)
            .for_each(|(p, s)| *p += config.mixing * (s - *p));
        log::debug!("iteration {iterations}: residual {residual:e} V");
        if config.mixing * residual < config.tol_potential {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(
            "no convergence after {iterations} iterations (last residual {:e} V)",
            history.last().copied().unwrap_or(f64::NAN)
        );
    }

    let profile = PotentialProfile::from_phi(&grid, phi);
    let electron_wells = well_layers(&grid, |i| grid.ec_offset[i]);
    let mut subbands = collect_states(
        &grid,
        &profile.ec,
        &grid.m_e,
        config.n_states,
        Some(fermi_level + config.fill_window),
        config.max_filled,
        &electron_wells,
    )?;
    let n = subband_density(&mut subbands, fermi_level, temperature, &grid.m_e, grid.dz);

    let hole_edge = profile.hole_edge();
    let hole_wells = well_layers(&grid, |i| grid.e_g[i] - grid.ec_offset[i]);
    let hole_subbands = collect_states(
        &grid,
        &hole_edge,
        &grid.m_hh,
        config.n_states,
        None,
        0,
        &hole_wells,
    )?;

    Ok(SolveResult {
        grid,
        profile,
        subbands,
        hole_subbands,
        fermi_level,
        n,
        iterations,
        converged,
        residual_history: history,
        temperature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::{IN_AL_AS, IN_GA_AS};
    use crate::stack::Layer;

    fn hemt(ionized: f64) -> DeviceStack {
        DeviceStack {
            layers: vec![
                Layer::new(IN_AL_AS, 20.0),
                Layer::new(IN_GA_AS, 10.0),
                Layer::new(IN_AL_AS, 5.0),
                Layer::new(IN_AL_AS, 5.0).doped(4e18, ionized),
                Layer::new(IN_AL_AS, 60.0),
            ],
            surface_barrier: 0.7 * 1.52,
            gate_bias: 0.0,
            temperature: 4.2,
        }
    }

    fn solve(stack: &DeviceStack, dz: f64) -> SolveResult {
        let config = SolverConfig {
            dz,
            ..SolverConfig::default()
        };
        self_consistent_solve(stack, &MaterialTable::builtin(), &config).unwrap()
    }

    #[test]
    fn converges_to_fixed_point() {
        let r = solve(&hemt(1.0), 0.1);
        assert!(r.converged, "{} iterations", r.iterations);
        assert!(r.sheet_density_in(1) > 1e11);
        assert!(r.substrate_field().abs() < 1e-6);
        let config = SolverConfig::default();
        assert!(r.reevaluate(&config).unwrap() < 10.0 * config.tol_potential);
        let tail = &r.residual_history[r.residual_history.len().saturating_sub(10)..];
        assert!(tail.last().unwrap() <= tail.first().unwrap());
    }

    #[test]
    fn states_are_orthonormal() {
        let r = solve(&hemt(1.0), 0.1);
        let dz = r.grid.dz;
        for (i, a) in r.subbands.iter().enumerate() {
            for (j, b) in r.subbands.iter().enumerate() {
                let dot: f64 = a.psi.iter().zip(&b.psi).map(|(x, y)| x * y).sum::<f64>() * dz;
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-6, "<{i}|{j}> = {dot}");
            }
        }
        assert!(r.subbands.windows(2).all(|w| w[0].energy <= w[1].energy));
    }

    #[test]
    fn neutral_donors_leave_channel_empty() {
        let r = solve(&hemt(0.0), 0.1);
        assert!(r.converged);
        assert!(r.sheet_density_in(1) < 1e6);
        let phi0 = r.profile.phi[0];
        assert!(r.profile.phi.iter().all(|p| (p - phi0).abs() < 1e-12));
    }

    #[test]
    fn grid_refinement_is_stable() {
        let coarse = solve(&hemt(1.0), 0.1).sheet_density_in(1);
        let fine = solve(&hemt(1.0), 0.05).sheet_density_in(1);
        assert!((coarse / fine - 1.0).abs() < 0.02, "{coarse:e} vs {fine:e}");
    }

    #[test]
    fn gate_bias_depletes_channel() {
        let open = solve(&hemt(1.0), 0.1).sheet_density_in(1);
        let closed = solve(&hemt(1.0).with_gate_bias(-0.5), 0.1).sheet_density_in(1);
        assert!(closed < 0.5 * open);
    }

    #[test]
    fn rejects_bad_config() {
        let config = SolverConfig {
            mixing: 0.0,
            ..SolverConfig::default()
        };
        assert!(self_consistent_solve(&hemt(1.0), &MaterialTable::builtin(), &config).is_err());
    }
}
