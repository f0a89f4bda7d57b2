//! Command-line front end: band diagrams, derived-quantity reports and
//! seeded trap-dynamics runs, each written to an output directory together
//! with a manifest that is sufficient to repeat the run.

mod dynamics;
mod output;
mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::derived::{
    absorbed_photon_rate, interband_wavelength, well_escape_time, window_power_fraction,
    wkb_exponent, wkb_transmission, BeamGeometry, BeamProfile, PhotonBudget,
};
use crate::materials::{MaterialError, MaterialTable};
use crate::schrodinger_poisson::{self_consistent_solve, SolveError, SolveResult, SolverConfig};
use crate::stack::{paper_stack, parse_stack, roles, DeviceStack, StackError};
use crate::trap_dynamics::DynamicsError;

pub use output::Manifest;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("self-consistent solve did not converge after {iterations} iterations (last update {residual:e} eV)")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::NotConverged { .. } => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<StackError> for CliError {
    fn from(e: StackError) -> Self {
        CliError::Config(format!("stack: {e}"))
    }
}

impl From<MaterialError> for CliError {
    fn from(e: MaterialError) -> Self {
        match e {
            MaterialError::Io { .. } => CliError::Io(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        CliError::Config(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "spt",
    version,
    about = "Windowed-gate double-quantum-well photodetector simulator"
)]
pub struct Cli {
    /// Material parameter table (TOML); the built-in table when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub materials: Option<PathBuf>,
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Self-consistent band diagram: band edges, potential and density versus depth.
    BandDiagram(SolveArgs),
    /// All derived scalars of a device as structured key-value text.
    Report(ReportArgs),
    /// WKB tunneling out of the absorption well.
    Wkb(WkbArgs),
    /// Interband absorption edge of a quantum well.
    Wavelength(WavelengthArgs),
    /// Photon budget of the gate window.
    Flux(FluxArgs),
    /// Trap dynamics under constant light (current staircase).
    Trace(DynamicsArgs),
    /// Trap dynamics during a linear wavelength sweep.
    Sweep(DynamicsArgs),
    /// Trap dynamics at the balanced wavelength with a periodic shutter.
    Switch(DynamicsArgs),
    /// Regenerate one of the reference figures on default settings.
    Repro(ReproArgs),
}

#[derive(Debug, Args, Clone)]
pub struct SolveArgs {
    /// Device stack file (TOML); the built-in reference device when omitted.
    #[arg(long, value_name = "PATH")]
    pub stack: Option<PathBuf>,
    /// Solver settings file (TOML); missing keys take their defaults.
    #[arg(long, value_name = "PATH")]
    pub solver: Option<PathBuf>,
    /// Override the stack's gate bias, V.
    #[arg(long = "gate-bias-V", value_name = "V", allow_hyphen_values = true)]
    pub gate_bias: Option<f64>,
    /// Override the grid step, nm.
    #[arg(long = "dz-nm", value_name = "NM")]
    pub dz: Option<f64>,
    /// Output directory.
    /// Output directory [default: spt-out/<command>].
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct ReportArgs {
    #[command(flatten)]
    pub solve: SolveArgs,
    #[command(flatten)]
    pub layers: LayerArgs,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct LayerArgs {
    /// Index (surface = 0) of the absorption well layer.
    #[arg(long, default_value_t = roles::ABSORPTION)]
    pub absorption_layer: usize,
    /// Index (surface = 0) of the channel layer.
    #[arg(long, default_value_t = roles::CHANNEL)]
    pub channel_layer: usize,
}

#[derive(Debug, Args, Clone)]
pub struct WkbArgs {
    #[command(flatten)]
    pub solve: SolveArgs,
    #[command(flatten)]
    pub layers: LayerArgs,
    /// Tunneling energy (Fermi level = 0), eV; the well's ground state when omitted.
    #[arg(long = "energy-eV", value_name = "EV", allow_hyphen_values = true)]
    pub energy: Option<f64>,
}

#[derive(Debug, Args, Clone)]
pub struct WavelengthArgs {
    #[command(flatten)]
    pub solve: SolveArgs,
    /// Index (surface = 0) of the well layer.
    #[arg(long, default_value_t = roles::ABSORPTION)]
    pub layer: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ProfileArg {
    Gaussian,
    Uniform,
}

#[derive(Debug, Args, Clone)]
pub struct FluxArgs {
    /// Total optical power, W. Without it, --incident-rate is used.
    #[arg(long = "power-W", value_name = "W")]
    pub power: Option<f64>,
    /// Photons/s reaching the window.
    #[arg(long = "incident-rate", value_name = "PER_S", default_value_t = 100.0)]
    pub incident_rate: f64,
    /// Light wavelength, µm.
    #[arg(long = "wavelength-um", value_name = "UM", default_value_t = 1.3)]
    pub wavelength: f64,
    /// Illumination spot diameter (1/e² diameter for a Gaussian), µm.
    #[arg(long = "spot-diameter-um", value_name = "UM", default_value_t = 5000.0)]
    pub spot_diameter: f64,
    /// Gate window diameter, µm.
    #[arg(long = "window-diameter-um", value_name = "UM", default_value_t = 1.0)]
    pub window_diameter: f64,
    /// Intensity profile of the spot.
    #[arg(long, value_enum, default_value_t = ProfileArg::Gaussian)]
    pub profile: ProfileArg,
    /// Fraction of window photons absorbed in the absorption layer.
    #[arg(long, default_value_t = 0.01)]
    pub absorptivity: f64,
    /// Output directory [default: spt-out/<command>].
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct DynamicsArgs {
    /// Scenario overrides (TOML, same layout as the manifest's [scenario]).
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Take the absorption edge from this device's solved absorption well.
    #[arg(long, value_name = "PATH")]
    pub stack: Option<PathBuf>,
    /// Index (surface = 0) of the absorption well in --stack.
    #[arg(long, default_value_t = roles::ABSORPTION)]
    pub absorption_layer: usize,
    /// Random stream seed; the run is a pure function of inputs and seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Simulated time, s.
    #[arg(long = "duration-s", value_name = "S")]
    pub duration: Option<f64>,
    /// Interval between current samples, s.
    #[arg(long = "sample-dt-s", value_name = "S")]
    pub sample_dt: Option<f64>,
    /// Light wavelength, µm.
    #[arg(long = "wavelength-um", value_name = "UM")]
    pub wavelength: Option<f64>,
    /// Absorbed photons per second while the shutter is open.
    #[arg(long = "absorbed-rate", value_name = "PER_S")]
    pub absorbed_rate: Option<f64>,
    /// Run seeds seed, seed+1, ..., seed+N−1 in parallel.
    #[arg(long, value_name = "N", default_value_t = 1)]
    pub ensemble: usize,
    /// Output directory [default: spt-out/<command>].
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Figure {
    Fig1,
    Fig3,
    Fig4,
    Fig5,
}

#[derive(Debug, Args, Clone)]
pub struct ReproArgs {
    #[arg(value_enum)]
    pub figure: Figure,
    /// Random stream seed (first seed of the ensemble for fig4).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Ensemble size for the sweep figure.
    #[arg(long, value_name = "N", default_value_t = 32)]
    pub ensemble: usize,
    /// Output directory [default: spt-out/<command>].
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();
    let echo: Vec<String> = args
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match run(&cli, &echo) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli, argv: &[String]) -> Result<(), CliError> {
    let started = Instant::now();
    let materials = match &cli.materials {
        Some(p) => MaterialTable::load(p)?,
        None => MaterialTable::builtin(),
    };
    let mut manifest = Manifest::new(argv, &materials);
    let out = match &cli.command {
        Command::BandDiagram(a) => band_diagram(a, &materials, &mut manifest)?,
        Command::Report(a) => report_command(a, &materials, &mut manifest)?,
        Command::Wkb(a) => wkb(a, &materials, &mut manifest)?,
        Command::Wavelength(a) => wavelength(a, &materials, &mut manifest)?,
        Command::Flux(a) => flux(a, &mut manifest)?,
        Command::Trace(a) => dynamics::run(dynamics::Mode::Trace, a, &materials, &mut manifest)?,
        Command::Sweep(a) => dynamics::run(dynamics::Mode::Sweep, a, &materials, &mut manifest)?,
        Command::Switch(a) => dynamics::run(dynamics::Mode::Switch, a, &materials, &mut manifest)?,
        Command::Repro(a) => repro(a, &materials, &mut manifest)?,
    };
    manifest.finish(started.elapsed().as_secs_f64());
    output::write(&out, "manifest.toml", &manifest.to_toml())
}

fn out_dir(given: &Option<PathBuf>, default: &str) -> PathBuf {
    given
        .clone()
        .unwrap_or_else(|| Path::new("spt-out").join(default))
}

pub(crate) fn load_stack(
    path: Option<&Path>,
    materials: &MaterialTable,
) -> Result<DeviceStack, CliError> {
    match path {
        None => Ok(paper_stack()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Io(format!("reading {}: {e}", p.display())))?;
            parse_stack(&text, materials)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        }
    }
}

fn load_solver(path: Option<&Path>) -> Result<SolverConfig, CliError> {
    let Some(p) = path else {
        return Ok(SolverConfig::default());
    };
    let text = std::fs::read_to_string(p)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", p.display())))?;
    let config: SolverConfig =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
    config.validate()?;
    Ok(config)
}

/// Loads inputs, solves, records them in the manifest and fails with exit
/// code 3 when the iteration did not converge.
pub(crate) fn solve(
    args: &SolveArgs,
    materials: &MaterialTable,
    manifest: &mut Manifest,
) -> Result<(DeviceStack, SolveResult), CliError> {
    let mut stack = load_stack(args.stack.as_deref(), materials)?;
    if let Some(v) = args.gate_bias {
        stack.gate_bias = v;
    }
    let mut config = load_solver(args.solver.as_deref())?;
    if let Some(dz) = args.dz {
        config.dz = dz;
    }
    config.validate()?;
    manifest.set_stack(&stack);
    manifest.set_solver(&config);
    let result = self_consistent_solve(&stack, materials, &config)?;
    manifest.set_solve_outcome(&result, &config);
    if !result.converged {
        let tail: Vec<String> = result
            .residual_history
            .iter()
            .rev()
            .take(5)
            .rev()
            .map(|r| format!("{:.3e}", config.mixing * r))
            .collect();
        eprintln!("last potential updates (eV): {}", tail.join(", "));
        return Err(CliError::NotConverged {
            iterations: result.iterations,
            residual: config.mixing * result.residual_history.last().copied().unwrap_or(f64::NAN),
        });
    }
    Ok((stack, result))
}

fn band_diagram(
    args: &SolveArgs,
    materials: &MaterialTable,
    manifest: &mut Manifest,
) -> Result<PathBuf, CliError> {
    let out = out_dir(&args.out, "band-diagram");
    let (_, result) = solve(args, materials, manifest)?;
    write_band_diagram(&out, &result)?;
    println!(
        "converged in {} iterations; {} grid nodes; total sheet density {:.3e} cm^-2",
        result.iterations,
        result.grid.len(),
        (0..result.grid.layer_nodes.len())
            .map(|l| result.sheet_density_in(l))
            .sum::<f64>()
    );
    println!("wrote {}", out.join("band_diagram.csv").display());
    Ok(out)
}

fn write_band_diagram(out: &Path, result: &SolveResult) -> Result<(), CliError> {
    output::write(out, "band_diagram.csv", &output::band_diagram_csv(result))?;
    output::write(out, "subbands.csv", &output::subbands_csv(result))
}

fn report_command(
    args: &ReportArgs,
    materials: &MaterialTable,
    manifest: &mut Manifest,
) -> Result<PathBuf, CliError> {
    let out = out_dir(&args.solve.out, "report");
    let (stack, result) = solve(&args.solve, materials, manifest)?;
    let rep = report::build(&stack, &result, args.layers)?;
    output::write(&out, "report.toml", &rep.to_toml())?;
    print!("{}", rep.to_console());
    Ok(out)
}

fn wkb(
    args: &WkbArgs,
    materials: &MaterialTable,
    manifest: &mut Manifest,
) -> Result<PathBuf, CliError> {
    let out = out_dir(&args.solve.out, "wkb");
    let (_, result) = solve(&args.solve, materials, manifest)?;
    let (from, to) = (args.layers.absorption_layer, args.layers.channel_layer);
    let escape =
        well_escape_time(&result, from, to).map_err(|e| CliError::Config(e.to_string()))?;
    let mut rep = report::Report::default();
    let state_energy = result
        .electron_state_in(from)
        .map(|s| s.energy)
        .unwrap_or(f64::NAN);
    rep.push("wkb.state_energy_eV", state_energy);
    rep.push("wkb.escape_time_s", escape.tau);
    rep.push("wkb.transmission", escape.transmission);
    rep.push("wkb.attempt_frequency_Hz", escape.attempt_frequency);
    if let Some(e) = args.energy {
        let grid = &result.grid;
        let (a, b) = (
            grid.nodes_of_layer(from.min(to)),
            grid.nodes_of_layer(from.max(to)),
        );
        let range = a.end..b.start + 1;
        let (ec, m) = (&result.profile.ec[range.clone()], &grid.m_e[range]);
        rep.push("wkb.override_energy_eV", e);
        rep.push("wkb.override_exponent", wkb_exponent(ec, m, grid.dz, e));
        rep.push(
            "wkb.override_transmission",
            wkb_transmission(ec, m, grid.dz, e),
        );
    }
    output::write(&out, "wkb.toml", &rep.to_toml())?;
    print!("{}", rep.to_console());
    Ok(out)
}

fn wavelength(
    args: &WavelengthArgs,
    materials: &MaterialTable,
    manifest: &mut Manifest,
) -> Result<PathBuf, CliError> {
    let out = out_dir(&args.solve.out, "wavelength");
    let (_, result) = solve(&args.solve, materials, manifest)?;
    let lambda =
        interband_wavelength(&result, args.layer).map_err(|e| CliError::Config(e.to_string()))?;
    let mut rep = report::Report::default();
    rep.push("well.layer", args.layer as f64);
    rep.push("well.interband_wavelength_um", lambda);
    output::write(&out, "wavelength.toml", &rep.to_toml())?;
    print!("{}", rep.to_console());
    Ok(out)
}

fn flux(args: &FluxArgs, manifest: &mut Manifest) -> Result<PathBuf, CliError> {
    let out = out_dir(&args.out, "flux");
    let beam = BeamGeometry {
        spot_diameter: args.spot_diameter,
        window_diameter: args.window_diameter,
        profile: match args.profile {
            ProfileArg::Gaussian => BeamProfile::Gaussian,
            ProfileArg::Uniform => BeamProfile::Uniform,
        },
    };
    if !(beam.spot_diameter > 0.0 && beam.window_diameter > 0.0 && args.wavelength > 0.0) {
        return Err(CliError::Config(
            "diameters and wavelength must be > 0".into(),
        ));
    }
    if !(0.0..=1.0).contains(&args.absorptivity) {
        return Err(CliError::Config("absorptivity must lie in [0, 1]".into()));
    }
    manifest.set_table("beam", &beam);
    let fraction = window_power_fraction(&beam);
    let budget = match args.power {
        Some(p) => absorbed_photon_rate(p, args.wavelength, fraction, args.absorptivity),
        None => PhotonBudget::from_incident(args.incident_rate, args.absorptivity),
    };
    let mut rep = report::Report::default();
    rep.push("optics.window_area_cm2", beam.window_area());
    rep.push("optics.window_power_fraction", fraction);
    rep.push(
        "optics.incident_rate_in_window_per_s",
        budget.incident_rate_in_window,
    );
    rep.push("optics.absorptivity", budget.absorptivity);
    rep.push("optics.absorbed_rate_per_s", budget.absorbed_rate);
    output::write(&out, "flux.toml", &rep.to_toml())?;
    print!("{}", rep.to_console());
    Ok(out)
}

fn repro(
    args: &ReproArgs,
    materials: &MaterialTable,
    manifest: &mut Manifest,
) -> Result<PathBuf, CliError> {
    let name = match args.figure {
        Figure::Fig1 => "fig1",
        Figure::Fig3 => "fig3",
        Figure::Fig4 => "fig4",
        Figure::Fig5 => "fig5",
    };
    let out = out_dir(&args.out, name);
    match args.figure {
        Figure::Fig1 => {
            let solve_args = SolveArgs {
                stack: None,
                solver: None,
                gate_bias: None,
                dz: None,
                out: Some(out.clone()),
            };
            let (stack, result) = solve(&solve_args, materials, manifest)?;
            write_band_diagram(&out, &result)?;
            let rep = report::build(
                &stack,
                &result,
                LayerArgs {
                    absorption_layer: roles::ABSORPTION,
                    channel_layer: roles::CHANNEL,
                },
            )?;
            output::write(&out, "report.toml", &rep.to_toml())?;
            print!("{}", rep.to_console());
        }
        Figure::Fig3 => dynamics::repro_staircase(&out, args.seed, manifest)?,
        Figure::Fig4 => dynamics::repro_sweep(&out, args.seed, args.ensemble, manifest)?,
        Figure::Fig5 => dynamics::repro_switch(&out, args.seed, manifest)?,
    }
    Ok(out)
}
