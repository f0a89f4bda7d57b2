//! Derived quantities of the reference device: absorption edge, effective
//! g-factor of the absorption-well electron, and its tunneling lifetime.

use spt_sim::derived::{
    confinement_energies, effective_g, interband_wavelength, layer_weights, well_escape_time,
};
use spt_sim::materials::MaterialTable;
use spt_sim::schrodinger_poisson::{self_consistent_solve, SolverConfig};
use spt_sim::stack::{paper_stack, roles};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let stack = paper_stack();
    let result =
        self_consistent_solve(&stack, &MaterialTable::builtin(), &SolverConfig::default())?;

    let (e_conf, h_conf) = confinement_energies(&result, roles::ABSORPTION)?;
    let lambda = interband_wavelength(&result, roles::ABSORPTION)?;
    println!("electron confinement  {e_conf:.4} eV");
    println!("hole confinement      {h_conf:.4} eV");
    println!("interband edge        {lambda:.4} um");

    let state = result
        .electron_state_in(roles::ABSORPTION)
        .ok_or("no state in the absorption well")?;
    println!(
        "effective g           {:.3}",
        effective_g(state, &result.grid)
    );
    for (layer, w) in layer_weights(state, &result.grid).iter().enumerate() {
        if *w > 1e-3 {
            println!(
                "  weight in layer {layer} ({}): {w:.3}",
                stack.layers[layer].material
            );
        }
    }

    let escape = well_escape_time(&result, roles::ABSORPTION, roles::CHANNEL)?;
    println!(
        "escape time           {:.3e} s ({:.2} h), T = {:.2e}",
        escape.tau,
        escape.tau / 3600.0,
        escape.transmission
    );
    println!(
        "channel density       {:.3e} cm^-2",
        result.sheet_density_in(roles::CHANNEL)
    );
    Ok(())
}
