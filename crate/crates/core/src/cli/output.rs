use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use toml::{Table, Value};

use super::CliError;
use crate::materials::MaterialTable;
use crate::schrodinger_poisson::{SolveResult, SolverConfig, Subband};
use crate::stack::{DeviceStack, Grid};
use crate::text::Float;

pub(crate) fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}

/// `z_nm,Ec_eV,Ev_eV,phi_V,n_cm3`
pub(crate) fn band_diagram_csv(result: &SolveResult) -> String {
    let p = &result.profile;
    let mut out = String::from("z_nm,Ec_eV,Ev_eV,phi_V,n_cm3\n");
    for i in 0..result.grid.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            Float(result.grid.z[i]),
            Float(p.ec[i]),
            Float(p.ev[i]),
            Float(p.phi[i]),
            Float(result.n[i])
        );
    }
    out
}

fn peak(s: &Subband, grid: &Grid) -> (usize, f64) {
    let i = s
        .psi
        .iter()
        .enumerate()
        .max_by(|a, b| (a.1 * a.1).total_cmp(&(b.1 * b.1)))
        .map_or(0, |(i, _)| i);
    (grid.layer[i], grid.z[i])
}

/// `carrier,index,energy_eV,sheet_density_cm2,peak_layer,peak_z_nm`; hole
/// energies are given on the ordinary (electron) energy scale.
pub(crate) fn subbands_csv(result: &SolveResult) -> String {
    let mut out = String::from("carrier,index,energy_eV,sheet_density_cm2,peak_layer,peak_z_nm\n");
    for (k, s) in result.subbands.iter().enumerate() {
        let (layer, z) = peak(s, &result.grid);
        let _ = writeln!(
            out,
            "electron,{k},{},{},{layer},{}",
            Float(s.energy),
            Float(s.sheet_density),
            Float(z)
        );
    }
    for (k, s) in result.hole_subbands.iter().enumerate() {
        let (layer, z) = peak(s, &result.grid);
        let _ = writeln!(
            out,
            "heavy_hole,{k},{},0,{layer},{}",
            Float(-s.energy),
            Float(z)
        );
    }
    out
}

fn to_value<T: Serialize>(v: &T) -> Value {
    Value::try_from(v).expect("plain data serializes to TOML")
}

/// Everything needed to repeat a run: arguments, versions, every resolved
/// input, the seed and the outcome.
#[derive(Debug, Clone)]
pub struct Manifest {
    table: Table,
}

impl Manifest {
    pub fn new(argv: &[String], materials: &MaterialTable) -> Self {
        let mut table = Table::new();
        let mut tool = Table::new();
        tool.insert("name".into(), "spt".into());
        tool.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        table.insert("tool".into(), tool.into());
        let mut run = Table::new();
        let args: Vec<Value> = argv
            .iter()
            .skip(1)
            .map(|a| Value::from(a.as_str()))
            .collect();
        run.insert("arguments".into(), args.into());
        table.insert("run".into(), run.into());
        let mut mat = Table::new();
        mat.insert("version".into(), materials.version().into());
        mat.insert("temperature_K".into(), materials.temperature().into());
        let records: Vec<Value> = materials.iter().map(to_value).collect();
        mat.insert("material".into(), records.into());
        table.insert("materials".into(), mat.into());
        Self { table }
    }

    fn run_table(&mut self) -> &mut Table {
        self.table
            .get_mut("run")
            .and_then(Value::as_table_mut)
            .expect("run table")
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.run_table()
            .insert("seed".into(), Value::Integer(seed as i64));
    }

    pub fn set_seeds(&mut self, seeds: &[u64]) {
        let v: Vec<Value> = seeds.iter().map(|&s| Value::Integer(s as i64)).collect();
        self.run_table().insert("seeds".into(), v.into());
    }

    pub fn set_table<T: Serialize>(&mut self, key: &str, value: &T) {
        self.table.insert(key.into(), to_value(value));
    }

    pub fn set_stack(&mut self, stack: &DeviceStack) {
        self.set_table("stack", stack);
    }

    pub fn set_solver(&mut self, config: &SolverConfig) {
        self.set_table("solver", config);
    }

    pub fn set_solve_outcome(&mut self, result: &SolveResult, config: &SolverConfig) {
        let mut t = Table::new();
        t.insert("converged".into(), result.converged.into());
        t.insert(
            "iterations".into(),
            Value::Integer(result.iterations as i64),
        );
        let last = result.residual_history.last().copied().unwrap_or(0.0);
        t.insert("final_update_eV".into(), (config.mixing * last).into());
        self.table.insert("solve".into(), t.into());
    }

    pub fn finish(&mut self, wall_time_s: f64) {
        let mut t = Table::new();
        t.insert("wall_time_s".into(), wall_time_s.into());
        self.table.insert("timing".into(), t.into());
    }

    pub fn table(&self) -> &Table {
        &self.table
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.table).expect("manifest serializes")
    }
}
