//! Describe a heterostructure in TOML, solve it, and compare the channel
//! density at a few gate biases.

use rayon::prelude::*;
use spt_sim::materials::MaterialTable;
use spt_sim::schrodinger_poisson::{self_consistent_solve, SolverConfig};
use spt_sim::stack::parse_stack;

const HEMT: &str = r#"
surface_barrier_eV = 0.75
temperature_K = 4.2

[[layers]]
material = "In0.52Al0.48As"
thickness_nm = 25.0

[[layers]]
material = "In0.53Ga0.47As"
thickness_nm = 15.0

[[layers]]
material = "In0.52Al0.48As"
thickness_nm = 8.0

[[layers]]
material = "In0.52Al0.48As"
thickness_nm = 6.0
doping_cm3 = 3e18

[[layers]]
material = "InP"
thickness_nm = 100.0
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let materials = MaterialTable::builtin();
    let stack = parse_stack(HEMT, &materials)?;
    let biases = [0.2, 0.0, -0.2, -0.4, -0.6];
    let rows: Vec<_> = biases
        .par_iter()
        .map(|&v| {
            let s = stack.clone().with_gate_bias(v);
            self_consistent_solve(&s, &materials, &SolverConfig::default()).map(|r| (v, r))
        })
        .collect::<Result<_, _>>()?;
    println!("{:>8} {:>14} {:>6}", "Vg (V)", "n_s (cm^-2)", "iters");
    for (v, r) in rows {
        println!("{v:8.2} {:14.3e} {:6}", r.sheet_density_in(1), r.iterations);
    }
    Ok(())
}
