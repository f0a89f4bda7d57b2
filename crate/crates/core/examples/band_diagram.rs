//! Solve the reference device at zero gate bias and print a coarse band
//! diagram with the occupied subbands.
//!
//!     cargo run --example band_diagram

use spt_sim::materials::MaterialTable;
use spt_sim::schrodinger_poisson::{self_consistent_solve, SolverConfig};
use spt_sim::stack::paper_stack;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let materials = MaterialTable::builtin();
    let stack = paper_stack();
    let result = self_consistent_solve(&stack, &materials, &SolverConfig::default())?;
    println!(
        "converged: {} after {} iterations",
        result.converged, result.iterations
    );

    println!(
        "{:>8} {:>9} {:>9} {:>11}  layer",
        "z (nm)", "Ec (eV)", "Ev (eV)", "n (cm^-3)"
    );
    let grid = &result.grid;
    for i in (0..grid.len())
        .step_by(25)
        .take_while(|&i| grid.z[i] <= 200.0)
    {
        println!(
            "{:8.1} {:9.4} {:9.4} {:11.3e}  {}",
            grid.z[i],
            result.profile.ec[i],
            result.profile.ev[i],
            result.n[i],
            stack.layers[grid.layer[i]].material
        );
    }

    println!("\noccupied electron subbands:");
    for s in result.subbands.iter().filter(|s| s.sheet_density > 1e8) {
        let peak = s
            .psi
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| grid.z[i])
            .unwrap_or(0.0);
        println!(
            "  E = {:+.4} eV, n = {:.3e} cm^-2, peak at {peak:.1} nm",
            s.energy, s.sheet_density
        );
    }
    Ok(())
}
