//! Finite-volume Poisson solver, d/dz[ε dφ/dz] = −ρ/ε0, with a Dirichlet
//! surface node and a zero-field substrate node.
//!
//! The permittivity between nodes `i` and `i + 1` is `eps[i]`. The substrate
//! node carries a half control volume, so the discrete zero-field condition
//! is exact for a charge-free substrate end.

use super::eigen::thomas_solve;
use super::SolveError;
use crate::constants::POISSON_SCALE;

fn check_lengths(charge: &[f64], eps: &[f64]) -> Result<usize, SolveError> {
    let n = charge.len();
    if n < 2 {
        return Err(SolveError::GridTooShort(n));
    }
    if eps.len() != n {
        return Err(SolveError::LengthMismatch {
            expected: n,
            got: eps.len(),
        });
    }
    Ok(n)
}

/// Operator coefficients for the unknowns `φ_1..φ_{n-1}`.
fn operator(eps: &[f64], dz: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = eps.len();
    let inv = 1.0 / (dz * dz);
    let m = n - 1;
    let mut sub = vec![0.0; m - 1];
    let mut diag = vec![0.0; m];
    let mut sup = vec![0.0; m - 1];
    for i in 1..n {
        let row = i - 1;
        if i < n - 1 {
            diag[row] = -(eps[i - 1] + eps[i]) * inv;
            sup[row] = eps[i] * inv;
        } else {
            diag[row] = -2.0 * eps[i - 1] * inv;
        }
        if row > 0 {
            sub[row - 1] = if i < n - 1 {
                eps[i - 1] * inv
            } else {
                2.0 * eps[i - 1] * inv
            };
        }
    }
    (sub, diag, sup)
}

/// Solves for φ (V) given the net charge density `charge` = ρ/q in cm⁻³,
/// relative permittivity `eps`, grid step `dz` (nm) and the surface potential.
pub fn solve_poisson(
    charge: &[f64],
    eps: &[f64],
    dz: f64,
    bc_surface: f64,
) -> Result<Vec<f64>, SolveError> {
    let n = check_lengths(charge, eps)?;
    let (sub, diag, sup) = operator(eps, dz);
    // Solve for φ − φ_surface, which vanishes on the Dirichlet node.
    let mut rhs: Vec<f64> = charge[1..].iter().map(|c| -POISSON_SCALE * c).collect();
    if !thomas_solve(&sub, &diag, &sup, &mut rhs) {
        return Err(SolveError::SingularPoisson);
    }
    let mut phi = Vec::with_capacity(n);
    phi.push(bc_surface);
    phi.extend(rhs.into_iter().map(|u| bc_surface + u));
    Ok(phi)
}

/// Discrete residual d/dz[ε dφ/dz] + ρ/ε0 in V/nm² at the free nodes.
pub fn poisson_residual(phi: &[f64], charge: &[f64], eps: &[f64], dz: f64) -> Vec<f64> {
    let n = phi.len();
    let inv = 1.0 / (dz * dz);
    (1..n)
        .map(|i| {
            let flux_in = eps[i - 1] * (phi[i] - phi[i - 1]);
            let div = if i < n - 1 {
                (eps[i] * (phi[i + 1] - phi[i]) - flux_in) * inv
            } else {
                -2.0 * flux_in * inv
            };
            div + POISSON_SCALE * charge[i]
        })
        .collect()
}

/// Nonlinear Poisson solve with a density response: the electron density at
/// node `i` is `electrons(i, φ_i − φ_ref_i)` returning `(n, dn/dφ)` in cm⁻³
/// and cm⁻³/V. Newton iteration with a bounded step.
pub fn solve_poisson_nonlinear<F>(
    donors: &[f64],
    eps: &[f64],
    dz: f64,
    bc_surface: f64,
    phi_ref: &[f64],
    electrons: F,
) -> Result<Vec<f64>, SolveError>
where
    F: Fn(usize, f64) -> (f64, f64),
{
    const MAX_STEP: f64 = 0.05;
    const MAX_NEWTON: usize = 400;
    let n = check_lengths(donors, eps)?;
    let (sub, diag0, sup) = operator(eps, dz);
    let mut phi = phi_ref.to_vec();
    phi[0] = bc_surface;
    let mut last = f64::INFINITY;
    for _ in 0..MAX_NEWTON {
        let mut charge = vec![0.0; n];
        let mut diag = diag0.clone();
        for i in 1..n {
            let (ne, dne) = electrons(i, phi[i] - phi_ref[i]);
            charge[i] = donors[i] - ne;
            diag[i - 1] -= POISSON_SCALE * dne;
        }
        let mut rhs: Vec<f64> = poisson_residual(&phi, &charge, eps, dz)
            .into_iter()
            .map(|r| -r)
            .collect();
        if !thomas_solve(&sub, &diag, &sup, &mut rhs) {
            return Err(SolveError::SingularPoisson);
        }
        let step = rhs.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        let scale = if step > MAX_STEP {
            MAX_STEP / step
        } else {
            1.0
        };
        phi[1..]
            .iter_mut()
            .zip(&rhs)
            .for_each(|(p, d)| *p += scale * d);
        last = step;
        if step < 1e-12 {
            return Ok(phi);
        }
    }
    if last < 1e-8 {
        Ok(phi)
    } else {
        Err(SolveError::PoissonNewton { step: last })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplace_with_neumann_end_is_constant() {
        let n = 101;
        let phi = solve_poisson(&vec![0.0; n], &vec![12.5; n], 0.1, 1.0).unwrap();
        assert!(phi.iter().all(|p| *p == 1.0));
    }

    #[test]
    fn uniform_slab_matches_parabola() {
        let (n, dz, eps, rho, v0) = (1001, 0.1, 12.0, 1e17, 0.3);
        let l = (n - 1) as f64 * dz;
        let phi = solve_poisson(&vec![rho; n], &vec![eps; n], dz, v0).unwrap();
        let k = POISSON_SCALE * rho / eps;
        for (i, p) in phi.iter().enumerate() {
            let z = i as f64 * dz;
            let exact = v0 + k * (l * z - 0.5 * z * z);
            let denom = (exact - v0).abs().max(1e-12);
            assert!((p - exact).abs() <= 1e-3 * denom + 1e-12, "z = {z}");
        }
    }

    #[test]
    fn permittivity_scale_invariance_without_charge() {
        let n = 50;
        let eps: Vec<f64> = (0..n).map(|i| 10.0 + (i % 7) as f64).collect();
        let a = solve_poisson(&vec![0.0; n], &eps, 0.2, -0.4).unwrap();
        let eps2: Vec<f64> = eps.iter().map(|e| 2.0 * e).collect();
        let b = solve_poisson(&vec![0.0; n], &eps2, 0.2, -0.4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dielectric_step_conserves_displacement() {
        let n = 201;
        let eps: Vec<f64> = (0..n).map(|i| if i < 100 { 10.0 } else { 15.0 }).collect();
        let mut charge = vec![0.0; n];
        charge[150] = 1e19;
        let phi = solve_poisson(&charge, &eps, 0.1, 0.0).unwrap();
        let res = poisson_residual(&phi, &charge, &eps, 0.1);
        let scale = POISSON_SCALE * 1e19;
        assert!(res.iter().all(|r| r.abs() < 1e-9 * scale));
        // Displacement above the sheet is uniform across the dielectric step.
        let d = |i: usize| eps[i] * (phi[i + 1] - phi[i]);
        assert!((d(50) - d(120)).abs() < 1e-9 * d(50).abs());
    }

    #[test]
    fn nonlinear_with_zero_response_is_linear() {
        let n = 301;
        let donors: Vec<f64> = (0..n)
            .map(|i| if (100..120).contains(&i) { 1e18 } else { 0.0 })
            .collect();
        let eps = vec![12.0; n];
        let lin = solve_poisson(&donors, &eps, 0.1, -0.7).unwrap();
        let nl =
            solve_poisson_nonlinear(&donors, &eps, 0.1, -0.7, &vec![-0.7; n], |_, _| (0.0, 0.0))
                .unwrap();
        for (a, b) in lin.iter().zip(&nl) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
