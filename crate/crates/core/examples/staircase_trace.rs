//! Current staircase under continuous above-gap light: every trapped
//! photoelectron lowers the channel current by one step until pinch-off.
//! Pass a seed as the first argument.

use spt_sim::trap_dynamics::{simulate_trace, staircase, EventKind, StaircaseSummary};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map_or(Ok(1), |s| s.parse())?;
    let mut scenario = staircase();
    // A few spontaneous upward spikes, as seen in real traces.
    scenario.rates.dark_spike_rate = 0.005;
    let trace = simulate_trace(&scenario, seed)?;

    let i0 = scenario.current(&scenario.initial);
    println!("start: {:.3} nA", i0 * 1e9);
    for e in &trace.events {
        let state = spt_sim::trap_dynamics::TrapState {
            n_trapped: e.n_trapped,
            n_ionized: e.n_ionized,
            ..scenario.initial
        };
        let arrow = if e.kind == EventKind::Trap {
            "down"
        } else {
            "up  "
        };
        println!(
            "{:8.2} s  {arrow}  n = {}  I = {:.4} nA",
            e.t,
            e.n_trapped,
            scenario.current(&state) * 1e9
        );
    }
    let summary = StaircaseSummary::from_trace(&trace, 0.01);
    match summary.pinch_time {
        Some(t) => println!("pinched off (< 1% of start) at {t:.1} s"),
        None => println!("not pinched off within {} s", scenario.duration),
    }
    Ok(())
}
