//! Device description: layer list, boundary conditions, file format and
//! discretization onto a uniform grid.
//!
//! # File format
//!
//! A device file is TOML:
//!
//! ```toml
//! surface_barrier_eV = 1.064   # optional, default 0.7 * Eg(cap)
//! gate_bias_V = 0.0            # optional, default 0
//! temperature_K = 4.2          # optional, default 4.2
//!
//! [[layers]]                   # surface first
//! material = "In0.52Al0.48As"
//! thickness_nm = 60.0
//! doping_cm3 = 0.0             # optional, default 0
//! ionized_fraction = 1.0       # optional, default 1
//! ```

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::Spanned;

use crate::materials::{MaterialParams, MaterialTable, INP, IN_AL_AS, IN_GA_AS};

pub const DEFAULT_TEMPERATURE: f64 = 4.2;
/// Fraction of the cap bandgap used for the surface pinning barrier when the
/// device file does not give one.
pub const SURFACE_PINNING_FRACTION: f64 = 0.7;
pub const DEFAULT_DZ: f64 = 0.1;

#[derive(Debug, Error, PartialEq)]
pub enum StackError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("device has no layers")]
    EmptyStack,
    #[error("line {line}: `{field}` {reason}")]
    InvalidField {
        field: String,
        line: usize,
        reason: String,
    },
    #[error("line {line}: `{field}` names unknown material `{name}`")]
    UnknownMaterial {
        field: String,
        line: usize,
        name: String,
    },
    #[error(
        "grid step {dz} nm is too coarse for the {thinnest} nm layer (need dz <= thickness/4)"
    )]
    GridTooCoarse { dz: f64, thinnest: f64 },
    #[error("grid step must be positive, got {0}")]
    InvalidStep(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Layer {
    pub material: String,
    #[serde(rename = "thickness_nm")]
    pub thickness: f64,
    #[serde(rename = "doping_cm3")]
    pub donor_doping: f64,
    pub ionized_fraction: f64,
}

impl Layer {
    pub fn new(material: &str, thickness: f64) -> Self {
        Self {
            material: material.to_string(),
            thickness,
            donor_doping: 0.0,
            ionized_fraction: 1.0,
        }
    }

    pub fn doped(mut self, donors_cm3: f64, ionized_fraction: f64) -> Self {
        self.donor_doping = donors_cm3;
        self.ionized_fraction = ionized_fraction;
        self
    }

    /// Ionized donor density, cm⁻³.
    pub fn ionized_donors(&self) -> f64 {
        self.donor_doping * self.ionized_fraction
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviceStack {
    /// Surface (gated side) first.
    pub layers: Vec<Layer>,
    #[serde(rename = "surface_barrier_eV")]
    pub surface_barrier: f64,
    #[serde(rename = "gate_bias_V")]
    pub gate_bias: f64,
    #[serde(rename = "temperature_K")]
    pub temperature: f64,
}

/// Roles of the layers in the reference device, as indices into
/// [`paper_stack`]'s layer list.
pub mod roles {
    pub const CAP: usize = 0;
    pub const UPPER_CLADDING: usize = 1;
    pub const ABSORPTION: usize = 2;
    pub const LOWER_CLADDING: usize = 3;
    pub const BARRIER: usize = 4;
    pub const CHANNEL: usize = 5;
    pub const SPACER: usize = 6;
    pub const DOPING: usize = 7;
}

/// The reference photodetector heterostructure with fully ionized donors.
pub fn paper_stack() -> DeviceStack {
    paper_stack_with_ionization(1.0)
}

/// Reference heterostructure with the given ionized fraction on the doping
/// layer (0 = before the sub-gap soak, 1 = fully soaked).
pub fn paper_stack_with_ionization(ionized_fraction: f64) -> DeviceStack {
    let layers = vec![
        Layer::new(IN_AL_AS, 60.0),
        Layer::new(INP, 10.0),
        Layer::new(IN_GA_AS, 4.5),
        Layer::new(INP, 10.0),
        Layer::new(IN_AL_AS, 20.0),
        Layer::new(IN_GA_AS, 10.0),
        Layer::new(IN_AL_AS, 30.0),
        Layer::new(IN_AL_AS, 10.0).doped(5e17, ionized_fraction),
        Layer::new(IN_AL_AS, 1000.0),
        Layer::new(INP, 100.0),
    ];
    let cap_gap = MaterialTable::builtin()
        .lookup(IN_AL_AS)
        .map(|m| m.e_g)
        .expect("built-in table has InAlAs");
    DeviceStack {
        layers,
        surface_barrier: SURFACE_PINNING_FRACTION * cap_gap,
        gate_bias: 0.0,
        temperature: DEFAULT_TEMPERATURE,
    }
}

impl DeviceStack {
    pub fn total_thickness(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness).sum()
    }

    /// Depth of the top of each layer, nm.
    pub fn layer_starts(&self) -> Vec<f64> {
        self.layers
            .iter()
            .scan(0.0, |z, l| {
                let start = *z;
                *z += l.thickness;
                Some(start)
            })
            .collect()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("stack serializes")
    }

    pub fn with_gate_bias(mut self, volts: f64) -> Self {
        self.gate_bias = volts;
        self
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayer {
    material: Spanned<String>,
    thickness_nm: Spanned<f64>,
    doping_cm3: Option<Spanned<f64>>,
    ionized_fraction: Option<Spanned<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawStack {
    layers: Option<Vec<RawLayer>>,
    surface_barrier_eV: Option<Spanned<f64>>,
    gate_bias_V: Option<Spanned<f64>>,
    temperature_K: Option<Spanned<f64>>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates a device description against `materials`.
pub fn parse_stack(text: &str, materials: &MaterialTable) -> Result<DeviceStack, StackError> {
    let raw: RawStack = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(0);
        let key = text
            .lines()
            .nth(line.saturating_sub(1))
            .and_then(|l| l.split_once('='))
            .map(|(k, _)| k.trim());
        StackError::Syntax {
            line,
            message: match key {
                Some(k) if !k.is_empty() => format!("`{k}`: {}", e.message()),
                _ => e.message().to_string(),
            },
        }
    })?;
    let invalid =
        |field: String, span: std::ops::Range<usize>, reason: &str| StackError::InvalidField {
            field,
            line: line_of(text, span.start),
            reason: reason.to_string(),
        };

    let raw_layers = raw.layers.unwrap_or_default();
    if raw_layers.is_empty() {
        return Err(StackError::EmptyStack);
    }
    let mut layers = Vec::with_capacity(raw_layers.len());
    for (i, rl) in raw_layers.into_iter().enumerate() {
        materials
            .lookup(rl.material.get_ref())
            .map_err(|_| StackError::UnknownMaterial {
                field: format!("layers[{i}].material"),
                line: line_of(text, rl.material.span().start),
                name: rl.material.get_ref().clone(),
            })?;
        let thickness = *rl.thickness_nm.get_ref();
        if !(thickness > 0.0) || !thickness.is_finite() {
            return Err(invalid(
                format!("layers[{i}].thickness_nm"),
                rl.thickness_nm.span(),
                "must be a positive length",
            ));
        }
        let doping = match &rl.doping_cm3 {
            Some(d) if !(*d.get_ref() >= 0.0) || !d.get_ref().is_finite() => {
                return Err(invalid(
                    format!("layers[{i}].doping_cm3"),
                    d.span(),
                    "must be >= 0",
                ))
            }
            Some(d) => *d.get_ref(),
            None => 0.0,
        };
        let ionized = match &rl.ionized_fraction {
            Some(f) if !(0.0..=1.0).contains(f.get_ref()) => {
                return Err(invalid(
                    format!("layers[{i}].ionized_fraction"),
                    f.span(),
                    "must lie in [0, 1]",
                ))
            }
            Some(f) => *f.get_ref(),
            None => 1.0,
        };
        layers.push(Layer {
            material: rl.material.into_inner(),
            thickness,
            donor_doping: doping,
            ionized_fraction: ionized,
        });
    }

    let temperature = match raw.temperature_K {
        Some(t) if !(*t.get_ref() > 0.0) => {
            return Err(invalid("temperature_K".into(), t.span(), "must be > 0"))
        }
        Some(t) => t.into_inner(),
        None => DEFAULT_TEMPERATURE,
    };
    let gate_bias = match raw.gate_bias_V {
        Some(v) if !v.get_ref().is_finite() => {
            return Err(invalid("gate_bias_V".into(), v.span(), "must be finite"))
        }
        Some(v) => v.into_inner(),
        None => 0.0,
    };
    let surface_barrier = match raw.surface_barrier_eV {
        Some(v) if !v.get_ref().is_finite() => {
            return Err(invalid(
                "surface_barrier_eV".into(),
                v.span(),
                "must be finite",
            ))
        }
        Some(v) => v.into_inner(),
        None => {
            let cap = materials
                .lookup(&layers[0].material)
                .expect("validated above");
            SURFACE_PINNING_FRACTION * cap.e_g
        }
    };

    Ok(DeviceStack {
        layers,
        surface_barrier,
        gate_bias,
        temperature,
    })
}

/// Uniform 1D discretization of a stack with per-node material properties.
///
/// Node `i` belongs to the layer that contains the cell `[z_i, z_{i+1})`;
/// the last node belongs to the last layer. Cell (half-point) properties are
/// therefore the properties of the cell's left node.
#[derive(Debug, Clone)]
pub struct Grid {
    pub dz: f64,
    pub z: Vec<f64>,
    pub layer: Vec<usize>,
    pub m_e: Vec<f64>,
    pub m_hh: Vec<f64>,
    pub eps_r: Vec<f64>,
    /// Conduction-band offset relative to the surface material, eV.
    pub ec_offset: Vec<f64>,
    pub e_g: Vec<f64>,
    pub g_e: Vec<f64>,
    /// Ionized donor density, cm⁻³.
    pub donors: Vec<f64>,
    /// Owner-node ranges of each layer.
    pub layer_nodes: Vec<Range<usize>>,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Span of the grid, nm.
    pub fn span(&self) -> f64 {
        self.dz * (self.len() - 1) as f64
    }

    /// Sub-grid ranges of consecutive nodes whose owner layer is in `layers`.
    pub fn nodes_of_layer(&self, layer: usize) -> Range<usize> {
        self.layer_nodes[layer].clone()
    }
}

/// Discretizes `stack` with step `dz` (nm). Layer thicknesses that are not a
/// multiple of `dz` are snapped to the nearest multiple with a warning.
pub fn discretize(
    stack: &DeviceStack,
    materials: &MaterialTable,
    dz: f64,
) -> Result<Grid, StackError> {
    if !(dz > 0.0) || !dz.is_finite() {
        return Err(StackError::InvalidStep(dz));
    }
    if stack.layers.is_empty() {
        return Err(StackError::EmptyStack);
    }
    let thinnest = stack
        .layers
        .iter()
        .map(|l| l.thickness)
        .fold(f64::INFINITY, f64::min);
    if dz > thinnest / 4.0 * (1.0 + 1e-12) {
        return Err(StackError::GridTooCoarse { dz, thinnest });
    }

    let params: Vec<&MaterialParams> = stack
        .layers
        .iter()
        .enumerate()
        .map(|(i, l)| {
            materials
                .lookup(&l.material)
                .map_err(|_| StackError::UnknownMaterial {
                    field: format!("layers[{i}].material"),
                    line: 0,
                    name: l.material.clone(),
                })
        })
        .collect::<Result<_, _>>()?;
    let reference = params[0].e_c_ref;

    let mut cells = Vec::with_capacity(stack.layers.len());
    for (i, l) in stack.layers.iter().enumerate() {
        let exact = l.thickness / dz;
        let n = exact.round();
        if (exact - n).abs() > 1e-6 * exact.max(1.0) {
            log::warn!(
                "layer {i} ({} nm) snapped to {} nm on a {dz} nm grid",
                l.thickness,
                n * dz
            );
        }
        cells.push(n as usize);
    }
    let n_cells: usize = cells.iter().sum();
    let n_nodes = n_cells + 1;

    let mut grid = Grid {
        dz,
        z: (0..n_nodes).map(|i| i as f64 * dz).collect(),
        layer: Vec::with_capacity(n_nodes),
        m_e: Vec::with_capacity(n_nodes),
        m_hh: Vec::with_capacity(n_nodes),
        eps_r: Vec::with_capacity(n_nodes),
        ec_offset: Vec::with_capacity(n_nodes),
        e_g: Vec::with_capacity(n_nodes),
        g_e: Vec::with_capacity(n_nodes),
        donors: Vec::with_capacity(n_nodes),
        layer_nodes: Vec::with_capacity(stack.layers.len()),
    };
    let last = stack.layers.len() - 1;
    let mut start = 0;
    for (li, (layer, p)) in stack.layers.iter().zip(&params).enumerate() {
        let count = cells[li] + usize::from(li == last);
        for _ in 0..count {
            grid.layer.push(li);
            grid.m_e.push(p.m_e);
            grid.m_hh.push(p.m_hh);
            grid.eps_r.push(p.eps_r);
            grid.ec_offset.push(p.e_c_ref - reference);
            grid.e_g.push(p.e_g);
            grid.g_e.push(p.g_e);
            grid.donors.push(layer.ionized_donors());
        }
        grid.layer_nodes.push(start..start + count);
        start += count;
    }
    debug_assert_eq!(start, n_nodes);
    Ok(grid)
}
