//! At the absorption edge trapping and neutralization balance, so a single
//! trap flips between two current levels, only while the shutter is open.

use spt_sim::trap_dynamics::{
    balanced_switching, distinct_levels, events_while_closed, openings_with_change, simulate_trace,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = balanced_switching();
    let trace = simulate_trace(&scenario, 5)?;

    let levels = distinct_levels(&trace);
    println!(
        "levels: {}",
        levels
            .iter()
            .map(|i| format!("{:.3} nA", i * 1e9))
            .collect::<Vec<_>>()
            .join(", ")
    );
    for (a, b) in scenario.shutter.open_intervals(scenario.duration) {
        let flips: Vec<String> = trace
            .events
            .iter()
            .filter(|e| e.t >= a && e.t < b)
            .map(|e| format!("{:.1}s->{}", e.t, e.n_trapped))
            .collect();
        println!("open {a:6.0}-{b:6.0} s: {}", flips.join(" "));
    }
    let (openings, changed) = openings_with_change(&trace);
    println!(
        "{changed}/{openings} openings switched, {} changes with the shutter closed",
        events_while_closed(&trace)
    );
    Ok(())
}
