//! Exact stationary occupancy of the trap chain compared with long kinetic
//! Monte Carlo runs.

use spt_sim::trap_dynamics::{
    long_run_occupancy, master_equation_steady_state, Illumination, MarkovChain, RateModel,
    TrapState,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rates = RateModel {
        dark_spike_rate: 1.0,
        ..RateModel::default()
    };
    let light = Illumination {
        wavelength: 1.0,
        absorbed_rate: 20.0,
    };
    let template = TrapState::new(3, 0);
    let exact = master_equation_steady_state(&rates, &light, template)?;
    let p = exact.unique().ok_or("chain is not connected")?;
    let kmc = long_run_occupancy(&rates, &light, template, 100_000, 1)?;
    println!("n_trapped  exact     kmc");
    for (n, (a, b)) in p.iter().zip(&kmc).enumerate() {
        println!("{n:9}  {a:.5}  {b:.5}");
    }

    // Two separate two-state loops: one distribution per closed class.
    let mut chain = MarkovChain::new(4);
    chain.add(0, 1, 1.0);
    chain.add(1, 0, 2.0);
    chain.add(2, 3, 5.0);
    chain.add(3, 2, 5.0);
    let split = chain.steady_state()?;
    for (members, dist) in split.classes.iter().zip(&split.distributions) {
        let probs: Vec<String> = members
            .iter()
            .map(|&m| format!("{m}: {:.3}", dist[m]))
            .collect();
        println!("class {members:?} -> {}", probs.join(", "));
    }
    Ok(())
}
