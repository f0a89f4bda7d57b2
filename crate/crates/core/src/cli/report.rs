use std::fmt::Write as _;

use toml::{Table, Value};

use super::{CliError, LayerArgs};
use crate::derived::{
    confinement_energies, effective_g, interband_wavelength, layer_weights, well_escape_time,
    window_power_fraction, BeamGeometry,
};
use crate::schrodinger_poisson::SolveResult;
use crate::stack::DeviceStack;

/// Ordered key-value pairs with dotted keys.
#[derive(Debug, Clone, Default)]
pub(crate) struct Report {
    entries: Vec<(String, Value)>,
}

impl Report {
    pub fn push(&mut self, key: &str, value: f64) {
        self.entries.push((key.to_string(), Value::Float(value)));
    }

    pub fn push_value(&mut self, key: &str, value: impl Into<Value>) {
        self.entries.push((key.to_string(), value.into()));
    }

    pub fn to_toml(&self) -> String {
        let mut root = Table::new();
        for (key, value) in &self.entries {
            let mut parts: Vec<&str> = key.split('.').collect();
            let last = parts.pop().expect("non-empty key");
            let mut t = &mut root;
            for p in parts {
                t = t
                    .entry(p)
                    .or_insert_with(|| Value::Table(Table::new()))
                    .as_table_mut()
                    .expect("report keys do not collide");
            }
            t.insert(last.to_string(), value.clone());
        }
        toml::to_string(&root).expect("report serializes")
    }

    /// Human-rounded `key = value` lines.
    pub fn to_console(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.entries {
            let _ = writeln!(out, "{key} = {}", rounded(value));
        }
        out
    }
}

fn rounded(v: &Value) -> String {
    match v {
        Value::Float(x) if x.is_finite() && *x != 0.0 && (x.abs() >= 1e4 || x.abs() < 1e-3) => {
            format!("{x:.4e}")
        }
        Value::Float(x) if x.is_finite() => format!("{:.6}", x)
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string(),
        Value::Array(a) => {
            let items: Vec<String> = a.iter().map(rounded).collect();
            format!("[{}]", items.join(", "))
        }
        other => other.to_string(),
    }
}

pub(crate) fn build(
    stack: &DeviceStack,
    result: &SolveResult,
    layers: LayerArgs,
) -> Result<Report, CliError> {
    let n_layers = stack.layers.len();
    for l in [layers.absorption_layer, layers.channel_layer] {
        if l >= n_layers {
            return Err(CliError::Config(format!(
                "layer index {l} out of range for a {n_layers}-layer stack"
            )));
        }
    }
    let mut r = Report::default();
    let mut notes: Vec<Value> = Vec::new();

    r.push_value("stack.layer_count", n_layers as i64);
    r.push("stack.total_thickness_nm", stack.total_thickness());
    r.push("stack.surface_barrier_eV", stack.surface_barrier);
    r.push("stack.gate_bias_V", stack.gate_bias);
    r.push("stack.temperature_K", stack.temperature);

    r.push_value("solver.converged", result.converged);
    r.push_value("solver.iterations", result.iterations as i64);
    r.push("solver.substrate_field_V_per_nm", result.substrate_field());

    let sheets: Vec<Value> = (0..n_layers)
        .map(|l| Value::Float(result.sheet_density_in(l)))
        .collect();
    let total: f64 = (0..n_layers).map(|l| result.sheet_density_in(l)).sum();
    r.push("density.total_sheet_cm2", total);
    r.push_value("density.layer_sheet_cm2", sheets);

    let ch = layers.channel_layer;
    r.push_value("channel.layer", ch as i64);
    r.push("channel.sheet_density_cm2", result.sheet_density_in(ch));
    match result.electron_state_in(ch) {
        Some(s) => r.push("channel.ground_state_eV", s.energy),
        None => notes.push(format!("no electron state localized in channel layer {ch}").into()),
    }

    let ab = layers.absorption_layer;
    r.push_value("absorption.layer", ab as i64);
    match result.electron_state_in(ab) {
        Some(s) => {
            r.push("absorption.electron_energy_eV", s.energy);
            r.push("absorption.electron_sheet_density_cm2", s.sheet_density);
            r.push("absorption.g_effective", effective_g(s, &result.grid));
            let w: Vec<Value> = layer_weights(s, &result.grid)
                .into_iter()
                .map(Value::Float)
                .collect();
            r.push_value("absorption.layer_weights", w);
        }
        None => notes.push(format!("no electron state localized in absorption layer {ab}").into()),
    }
    if let Some(h) = result.hole_state_in(ab) {
        r.push("absorption.hole_energy_eV", -h.energy);
    }
    match (
        confinement_energies(result, ab),
        interband_wavelength(result, ab),
    ) {
        (Ok((e, h)), Ok(lambda)) => {
            r.push("absorption.electron_confinement_eV", e);
            r.push("absorption.hole_confinement_eV", h);
            r.push("absorption.interband_wavelength_um", lambda);
        }
        (Err(e), _) | (_, Err(e)) => notes.push(e.to_string().into()),
    }
    match well_escape_time(result, ab, ch) {
        Ok(t) => {
            r.push("escape.transmission", t.transmission);
            r.push("escape.attempt_frequency_Hz", t.attempt_frequency);
            r.push("escape.time_s", t.tau);
        }
        Err(e) => notes.push(e.to_string().into()),
    }

    let beam = BeamGeometry::reference();
    r.push("optics.spot_diameter_um", beam.spot_diameter);
    r.push("optics.window_diameter_um", beam.window_diameter);
    r.push("optics.window_area_cm2", beam.window_area());
    r.push("optics.window_power_fraction", window_power_fraction(&beam));

    if !notes.is_empty() {
        r.push_value("notes", notes);
    }
    Ok(r)
}
