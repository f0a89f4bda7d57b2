//! Position-dependent-mass (BenDaniel–Duke) effective-mass Schrödinger solver.
//!
//! The operator −(ħ²/2) d/dz[(1/m) dψ/dz] + V ψ is discretized on the
//! uniform grid with ψ = 0 at both grid ends. The mass between nodes `i` and
//! `i + 1` is the mass of node `i`, which on a layered [`Grid`] is exactly the
//! mass of the cell.
//!
//! [`Grid`]: crate::stack::Grid

use std::ops::Range;

use super::eigen::SymTridiagonal;
use super::SolveError;
use crate::constants::HBAR2_OVER_2M0;

/// A confined state on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Subband {
    /// eV.
    pub energy: f64,
    /// Envelope on every grid node (zero at both ends), nm^-1/2,
    /// normalized so that Σ ψ² dz = 1.
    pub psi: Vec<f64>,
    /// cm⁻²; zero until filled by [`subband_density`](super::subband_density).
    pub sheet_density: f64,
}

impl Subband {
    /// Probability weight of the envelope on `nodes`.
    pub fn weight_in(&self, nodes: Range<usize>, dz: f64) -> f64 {
        self.psi[nodes].iter().map(|p| p * p).sum::<f64>() * dz
    }

    /// Envelope-probability-weighted value of a per-node quantity.
    pub fn expectation(&self, values: &[f64], dz: f64) -> f64 {
        self.psi
            .iter()
            .zip(values)
            .map(|(p, v)| p * p * v)
            .sum::<f64>()
            * dz
    }
}

/// Hamiltonian over the interior nodes `1..n-1`.
pub fn hamiltonian(edge: &[f64], mass: &[f64], dz: f64) -> Result<SymTridiagonal, SolveError> {
    let n = edge.len();
    if n < 3 {
        return Err(SolveError::GridTooShort(n));
    }
    if mass.len() != n {
        return Err(SolveError::LengthMismatch {
            expected: n,
            got: mass.len(),
        });
    }
    if let Some(i) = mass.iter().position(|m| !(*m > 0.0)) {
        return Err(SolveError::NonPositiveMass(i));
    }
    let c = HBAR2_OVER_2M0 / (dz * dz);
    // Coupling through the cell [z_i, z_{i+1}].
    let t: Vec<f64> = mass[..n - 1].iter().map(|m| c / m).collect();
    let diag = (1..n - 1).map(|i| edge[i] + t[i - 1] + t[i]).collect();
    let off = (1..n - 2).map(|i| -t[i]).collect();
    Ok(SymTridiagonal::new(diag, off))
}

fn finish_state(
    h: &SymTridiagonal,
    energy: f64,
    inner: Vec<f64>,
    dz: f64,
    index: usize,
) -> Result<Subband, SolveError> {
    let residual = h.residual(energy, &inner);
    let tol = 1e-7 * h.gershgorin().1.abs().max(1.0);
    if !(residual < tol) {
        return Err(SolveError::EigenNotConverged { index, residual });
    }
    let mut psi = Vec::with_capacity(inner.len() + 2);
    psi.push(0.0);
    psi.extend(inner);
    psi.push(0.0);
    let norm = (psi.iter().map(|p| p * p).sum::<f64>() * dz).sqrt();
    psi.iter_mut().for_each(|p| *p /= norm);
    // Sign convention: the first appreciable lobe is positive.
    let peak = psi.iter().fold(0.0_f64, |m, p| m.max(p.abs()));
    if let Some(first) = psi.iter().find(|p| p.abs() > 1e-3 * peak) {
        if *first < 0.0 {
            psi.iter_mut().for_each(|p| *p = -*p);
        }
    }
    Ok(Subband {
        energy,
        psi,
        sheet_density: 0.0,
    })
}

/// States `indices` of `h`, each paired with its eigenvalue index.
pub(crate) fn indexed_states(
    h: &SymTridiagonal,
    indices: Range<usize>,
    dz: f64,
) -> Result<Vec<(usize, Subband)>, SolveError> {
    let cluster = h.cluster_tolerance();
    let mut energies = Vec::with_capacity(indices.len());
    let mut inner: Vec<Vec<f64>> = Vec::with_capacity(indices.len());
    for k in indices.clone() {
        let e = h.eigenvalue(k);
        let near: Vec<&[f64]> = energies
            .iter()
            .zip(&inner)
            .filter(|(ej, _): &(&f64, _)| (e - **ej).abs() < cluster)
            .map(|(_, v)| v.as_slice())
            .collect();
        let v = h.eigenvector(e, &near);
        energies.push(e);
        inner.push(v);
    }
    energies
        .into_iter()
        .zip(inner)
        .zip(indices)
        .map(|((e, v), k)| finish_state(h, e, v, dz, k).map(|s| (k, s)))
        .collect()
}

fn strip(states: Vec<(usize, Subband)>) -> Vec<Subband> {
    states.into_iter().map(|(_, s)| s).collect()
}

/// The `n_states` lowest eigenstates, energy-ascending and normalized.
pub fn solve_schrodinger(
    edge: &[f64],
    mass: &[f64],
    dz: f64,
    n_states: usize,
) -> Result<Vec<Subband>, SolveError> {
    let h = hamiltonian(edge, mass, dz)?;
    if n_states > h.len() {
        return Err(SolveError::TooManyStates {
            requested: n_states,
            available: h.len(),
        });
    }
    indexed_states(&h, 0..n_states, dz).map(strip)
}

/// All eigenstates with energy below `ceiling`, at most `max_states` of them.
pub fn solve_schrodinger_below(
    edge: &[f64],
    mass: &[f64],
    dz: f64,
    ceiling: f64,
    max_states: usize,
) -> Result<Vec<Subband>, SolveError> {
    let h = hamiltonian(edge, mass, dz)?;
    let count = h.count_below(ceiling);
    if count > max_states {
        log::warn!("{count} states below {ceiling:.4} eV, keeping the lowest {max_states}");
    }
    indexed_states(&h, 0..count.min(max_states), dz).map(strip)
}

/// Lowest state whose probability weight on `nodes` exceeds `min_weight`,
/// searching upward from the bottom of the band edge on `nodes`. Returns
/// `None` when no such state exists below `ceiling` within `max_scan` states.
pub fn lowest_localized_state(
    edge: &[f64],
    mass: &[f64],
    dz: f64,
    nodes: Range<usize>,
    min_weight: f64,
    ceiling: f64,
    max_scan: usize,
) -> Result<Option<Subband>, SolveError> {
    let h = hamiltonian(edge, mass, dz)?;
    Ok(localized_in(&h, edge, dz, nodes, min_weight, ceiling, max_scan)?.map(|(_, s)| s))
}

pub(crate) fn localized_in(
    h: &SymTridiagonal,
    edge: &[f64],
    dz: f64,
    nodes: Range<usize>,
    min_weight: f64,
    ceiling: f64,
    max_scan: usize,
) -> Result<Option<(usize, Subband)>, SolveError> {
    let floor = edge[nodes.clone()]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let first = h.count_below(floor);
    let last = h.count_below(ceiling).min(first + max_scan);
    for k in first..last {
        let e = h.eigenvalue(k);
        let v = h.eigenvector(e, &[]);
        let state = finish_state(h, e, v, dz, k)?;
        if state.weight_in(nodes.clone(), dz) > min_weight {
            return Ok(Some((k, state)));
        }
    }
    Ok(None)
}
