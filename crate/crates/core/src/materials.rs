//! Registry of III-V material parameters at cryogenic temperature.
//!
//! The built-in table is compiled from `data/materials.toml`; an alternative
//! table with the same schema can be loaded with [`MaterialTable::from_toml`].

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUILTIN_TABLE: &str = include_str!("../data/materials.toml");

pub const IN_GA_AS: &str = "In0.53Ga0.47As";
pub const IN_AL_AS: &str = "In0.52Al0.48As";
pub const INP: &str = "InP";

#[derive(Debug, Error)]
pub enum MaterialError {
    #[error("unknown material `{0}`")]
    UnknownMaterial(String),
    #[error("material table: {0}")]
    Parse(String),
    #[error("material `{name}`: {reason}")]
    Invalid { name: String, reason: String },
    #[error("reading material table {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Band, transport and spin constants of one material.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub name: String,
    /// Bandgap, eV.
    #[serde(rename = "Eg_eV")]
    pub e_g: f64,
    /// Electron effective mass, m0.
    #[serde(rename = "me")]
    pub m_e: f64,
    /// Heavy-hole mass along the growth axis, m0.
    #[serde(rename = "mhh")]
    pub m_hh: f64,
    pub eps_r: f64,
    pub g_e: f64,
    /// Conduction-band edge on the common absolute scale, eV.
    #[serde(rename = "Ec_ref_eV")]
    pub e_c_ref: f64,
}

impl MaterialParams {
    fn validate(&self) -> Result<(), MaterialError> {
        let bad = |reason: &str| MaterialError::Invalid {
            name: self.name.clone(),
            reason: reason.to_string(),
        };
        if !(self.e_g > 0.0) {
            return Err(bad("Eg_eV must be > 0"));
        }
        if !(self.m_e > 0.0) {
            return Err(bad("me must be > 0"));
        }
        if !(self.m_hh > 0.0) {
            return Err(bad("mhh must be > 0"));
        }
        if !(self.eps_r >= 1.0) {
            return Err(bad("eps_r must be >= 1"));
        }
        if !self.g_e.is_finite() || !self.e_c_ref.is_finite() {
            return Err(bad("g_e and Ec_ref_eV must be finite"));
        }
        Ok(())
    }

    /// Valence-band edge on the common scale.
    pub fn e_v_ref(&self) -> f64 {
        self.e_c_ref - self.e_g
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    version: String,
    #[serde(rename = "temperature_K")]
    temperature: f64,
    material: Vec<MaterialParams>,
}

/// Immutable, versioned material registry.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialTable {
    version: String,
    temperature: f64,
    entries: BTreeMap<String, MaterialParams>,
}

impl MaterialTable {
    /// The compiled-in 4.2 K table.
    pub fn builtin() -> Self {
        Self::from_toml(BUILTIN_TABLE).expect("built-in material table is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self, MaterialError> {
        let file: TableFile =
            toml::from_str(text).map_err(|e| MaterialError::Parse(e.to_string()))?;
        let mut entries = BTreeMap::new();
        for m in file.material {
            m.validate()?;
            if entries.insert(m.name.clone(), m.clone()).is_some() {
                return Err(MaterialError::Invalid {
                    name: m.name,
                    reason: "duplicate entry".into(),
                });
            }
        }
        for required in [IN_GA_AS, IN_AL_AS, INP] {
            if !entries.contains_key(required) {
                return Err(MaterialError::Parse(format!(
                    "table must define `{required}`"
                )));
            }
        }
        Ok(Self {
            version: file.version,
            temperature: file.temperature,
            entries,
        })
    }

    pub fn load(path: &Path) -> Result<Self, MaterialError> {
        let text = std::fs::read_to_string(path).map_err(|source| MaterialError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    /// Temperature the parameters were compiled for, K.
    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn lookup(&self, name: &str) -> Result<&MaterialParams, MaterialError> {
        self.entries
            .get(name)
            .ok_or_else(|| MaterialError::UnknownMaterial(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &MaterialParams> {
        self.entries.values()
    }
}

impl Default for MaterialTable {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Conduction- and valence-band offsets of `a` relative to `b`, eV.
///
/// `dEc = Ec(a) - Ec(b)`, `dEv = Ev(a) - Ev(b)`, so `dEc - dEv = Eg(a) - Eg(b)`.
pub fn band_offsets(a: &MaterialParams, b: &MaterialParams) -> (f64, f64) {
    let dec = a.e_c_ref - b.e_c_ref;
    let dev = a.e_v_ref() - b.e_v_ref();
    (dec, dev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn design_g_factors() {
        let t = MaterialTable::builtin();
        assert_eq!(t.lookup(IN_GA_AS).unwrap().g_e, -4.5);
        assert_eq!(t.lookup(INP).unwrap().g_e, 1.2);
    }

    #[test]
    fn unknown_material_names_identifier() {
        let err = MaterialTable::builtin().lookup("unobtainium").unwrap_err();
        assert!(matches!(err, MaterialError::UnknownMaterial(ref n) if n == "unobtainium"));
        assert!(err.to_string().contains("unobtainium"));
    }

    #[test]
    fn offsets_identity_and_antisymmetry() {
        let t = MaterialTable::builtin();
        for a in t.iter() {
            assert_eq!(band_offsets(a, a), (0.0, 0.0));
            for b in t.iter() {
                let (c1, v1) = band_offsets(a, b);
                let (c2, v2) = band_offsets(b, a);
                assert_eq!(c1, -c2);
                assert_eq!(v1, -v2);
                assert!(((c1 - v1) - (a.e_g - b.e_g)).abs() < 1e-12);
                // Straddling (type-I) alignment: the gap difference splits
                // between the two edges.
                if c1 * v1 <= 0.0 {
                    assert!((c1.abs() + v1.abs() - (a.e_g - b.e_g).abs()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn ingaas_is_well_against_inalas_and_inp() {
        let t = MaterialTable::builtin();
        let ga = t.lookup(IN_GA_AS).unwrap();
        let (dec, dev) = band_offsets(ga, t.lookup(IN_AL_AS).unwrap());
        assert!(dec < 0.0 && dev > 0.0);
        assert!((dec + 0.52).abs() < 1e-12);
        let (dec, dev) = band_offsets(ga, t.lookup(INP).unwrap());
        assert!(dec < 0.0 && dev > 0.0);
    }

    #[test]
    fn lookups_are_pure() {
        let t = MaterialTable::builtin();
        let a = t.lookup(INP).unwrap().clone();
        let b = t.lookup(INP).unwrap().clone();
        assert_eq!(a.e_g.to_bits(), b.e_g.to_bits());
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_invalid_records() {
        let text = BUILTIN_TABLE.replacen("Eg_eV = 0.816", "Eg_eV = -1.0", 1);
        assert!(matches!(
            MaterialTable::from_toml(&text),
            Err(MaterialError::Invalid { .. })
        ));
    }
}
