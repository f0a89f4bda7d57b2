use std::fmt::Write as _;
use std::path::Path;

use toml::{Table, Value};

use super::output::write;
use super::{load_stack, CliError, DynamicsArgs, Manifest};
use crate::derived::interband_wavelength;
use crate::materials::MaterialTable;
use crate::schrodinger_poisson::{self_consistent_solve, SolverConfig};
use crate::text::Float;
use crate::trap_dynamics::{
    distinct_levels, ensemble_median, events_while_closed, first_argmin, openings_with_change,
    run_ensemble, Preset, Scenario, StaircaseSummary, Trace,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    Trace,
    Sweep,
    Switch,
}

impl Mode {
    fn preset(self) -> Preset {
        match self {
            Mode::Trace => Preset::Staircase,
            Mode::Sweep => Preset::Sweep,
            Mode::Switch => Preset::Balanced,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Mode::Trace => "trace",
            Mode::Sweep => "sweep",
            Mode::Switch => "switch",
        }
    }
}

fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn build_scenario(
    mode: Mode,
    args: &DynamicsArgs,
    materials: &MaterialTable,
) -> Result<Scenario, CliError> {
    let mut scenario = mode.preset().scenario();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
        let over: Table = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut base = Table::try_from(&scenario).expect("scenario serializes");
        merge(&mut base, over);
        scenario = base
            .try_into()
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    }
    if let Some(path) = &args.stack {
        let stack = load_stack(Some(path), materials)?;
        let result = self_consistent_solve(&stack, materials, &SolverConfig::default())
            .map_err(CliError::from)?;
        if !result.converged {
            return Err(CliError::NotConverged {
                iterations: result.iterations,
                residual: result.residual_history.last().copied().unwrap_or(f64::NAN),
            });
        }
        scenario.rates.lambda_gap = interband_wavelength(&result, args.absorption_layer)
            .map_err(|e| CliError::Config(e.to_string()))?;
        if mode == Mode::Switch {
            scenario.light.wavelength = scenario.rates.lambda_gap;
        }
    }
    if let Some(d) = args.duration {
        scenario.duration = d;
    }
    if let Some(dt) = args.sample_dt {
        scenario.sample_dt = dt;
    }
    if let Some(l) = args.wavelength {
        scenario.light.wavelength = l;
    }
    if let Some(r) = args.absorbed_rate {
        scenario.light.absorbed_rate = r;
    }
    scenario.validate()?;
    Ok(scenario)
}

fn seeds(first: u64, n: usize) -> Result<Vec<u64>, CliError> {
    if n == 0 {
        return Err(CliError::Config("--ensemble must be at least 1".into()));
    }
    Ok((0..n as u64).map(|k| first.wrapping_add(k)).collect())
}

fn write_trace(dir: &Path, trace: &Trace) -> Result<(), CliError> {
    write(dir, "trace.csv", &trace.samples_csv())?;
    write(dir, "events.csv", &trace.events_csv())
}

/// `t_s,wavelength_um,I_median_A`
fn median_csv(traces: &[Trace]) -> String {
    let median = ensemble_median(traces);
    let mut out = String::from("t_s,wavelength_um,I_median_A\n");
    for (s, m) in traces[0].samples.iter().zip(&median) {
        let _ = writeln!(out, "{},{},{}", Float(s.t), Float(s.wavelength), Float(*m));
    }
    out
}

fn write_runs(dir: &Path, traces: &[Trace]) -> Result<(), CliError> {
    if let [only] = traces {
        return write_trace(dir, only);
    }
    for t in traces {
        write_trace(&dir.join(format!("seed_{}", t.seed)), t)?;
    }
    write(dir, "ensemble_median.csv", &median_csv(traces))
}

fn summarize(mode: Mode, traces: &[Trace]) -> String {
    let mut out = String::new();
    match mode {
        Mode::Trace => {
            for t in traces {
                let s = StaircaseSummary::from_trace(t, 0.01);
                let pinch = s
                    .pinch_time
                    .map_or_else(|| "not reached".to_string(), |p| format!("{p:.1} s"));
                let _ = writeln!(
                    out,
                    "seed {}: {} steps before pinch-off ({pinch}); start {:.3e} A",
                    t.seed,
                    s.step_count(),
                    s.initial_current
                );
            }
        }
        Mode::Sweep => {
            let median = ensemble_median(traces);
            if let Some(k) = first_argmin(&median) {
                let s = traces[0].samples[k];
                let _ = writeln!(
                    out,
                    "median current minimum {:.3e} A at t = {:.1} s, wavelength {:.3} um (edge {:.3} um)",
                    median[k], s.t, s.wavelength, traces[0].scenario.rates.lambda_gap
                );
            }
        }
        Mode::Switch => {
            for t in traces {
                let (openings, changed) = openings_with_change(t);
                let _ = writeln!(
                    out,
                    "seed {}: {} current levels; {changed}/{openings} openings switched; {} changes while closed",
                    t.seed,
                    distinct_levels(t).len(),
                    events_while_closed(t)
                );
            }
        }
    }
    out
}

fn execute(
    mode: Mode,
    scenario: &Scenario,
    seeds: &[u64],
    dir: &Path,
    manifest: &mut Manifest,
) -> Result<(), CliError> {
    let traces = run_ensemble(scenario, seeds)?;
    write_runs(dir, &traces)?;
    print!("{}", summarize(mode, &traces));
    if let [one] = seeds {
        manifest.set_seed(*one);
    } else {
        manifest.set_seeds(seeds);
    }
    Ok(())
}

pub(crate) fn run(
    mode: Mode,
    args: &DynamicsArgs,
    materials: &MaterialTable,
    manifest: &mut Manifest,
) -> Result<std::path::PathBuf, CliError> {
    let out = super::out_dir(&args.out, mode.name());
    let scenario = build_scenario(mode, args, materials)?;
    manifest.set_table("scenario", &scenario);
    execute(
        mode,
        &scenario,
        &seeds(args.seed, args.ensemble)?,
        &out,
        manifest,
    )?;
    Ok(out)
}

pub(crate) fn repro_staircase(
    out: &Path,
    seed: u64,
    manifest: &mut Manifest,
) -> Result<(), CliError> {
    let mut scenarios = Table::new();
    for (name, preset) in [
        ("rate_1", Preset::Staircase),
        ("rate_0.3", Preset::StaircaseCaptionRate),
    ] {
        let scenario = preset.scenario();
        println!("absorbed rate {} /s:", scenario.light.absorbed_rate);
        execute(Mode::Trace, &scenario, &[seed], &out.join(name), manifest)?;
        scenarios.insert(
            name.into(),
            Value::try_from(&scenario).expect("scenario serializes"),
        );
    }
    manifest.set_table("scenarios", &scenarios);
    Ok(())
}

pub(crate) fn repro_sweep(
    out: &Path,
    seed: u64,
    ensemble: usize,
    manifest: &mut Manifest,
) -> Result<(), CliError> {
    let scenario = Preset::Sweep.scenario();
    manifest.set_table("scenario", &scenario);
    execute(
        Mode::Sweep,
        &scenario,
        &seeds(seed, ensemble)?,
        out,
        manifest,
    )
}

pub(crate) fn repro_switch(out: &Path, seed: u64, manifest: &mut Manifest) -> Result<(), CliError> {
    let scenario = Preset::Balanced.scenario();
    manifest.set_table("scenario", &scenario);
    execute(Mode::Switch, &scenario, &[seed], out, manifest)
}
