//! Run configuration: a TOML file with one section per command, plus
//! `section.key=value` overrides from the command line.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub spectrum: SpectrumConfig,
    pub dimension: DimensionConfig,
    pub certify: CertifyConfig,
    pub mesh: MeshConfig,
    pub subshift: SubshiftConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub coupling: f64,
    pub k: usize,
    /// Gap tolerance used when merging σ_k and σ_{k+1}.
    pub resolution: f64,
    /// Points of an optional escape-test sweep over the cover's hull.
    pub escape_points: usize,
    pub n_max: usize,
    pub escape_radius: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig { coupling: 1.0, k: 10, resolution: 1e-3, escape_points: 0, n_max: 1000, escape_radius: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DimensionConfig {
    /// "cantor", "spectrum" or "sweep".
    pub mode: String,
    pub cantor_ratio: f64,
    pub cantor_depth: u32,
    pub coupling: f64,
    /// Approximant index; 0 picks it automatically.
    pub k: usize,
    pub couplings: Vec<f64>,
    pub eps_max: f64,
    /// Smallest box size; 0 means four times the set's resolution.
    pub eps_min: f64,
    pub eps_ratio: f64,
}

impl Default for DimensionConfig {
    fn default() -> Self {
        DimensionConfig {
            mode: "cantor".into(),
            cantor_ratio: 1.0 / 3.0,
            cantor_depth: 10,
            coupling: 16.0,
            k: 0,
            couplings: vec![16.0, 32.0, 64.0, 128.0],
            eps_max: 0.1,
            eps_min: 0.0,
            eps_ratio: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifyConfig {
    /// "recurrence", "model_map", "empirical" or "all".
    pub mode: String,
    pub lambda: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub n: usize,
    pub c1: f64,
    pub c2: f64,
    pub eta: f64,
    pub zeta: f64,
    pub n_ref: usize,
    pub slack_runs: usize,
    pub slack_max: f64,
    pub samples: usize,
    pub coupling: f64,
    pub n_forward: usize,
    /// Singular-neighbourhood radius; 0 means max(0.05, 2V).
    pub radius: f64,
    pub iteration_cap: usize,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            mode: "all".into(),
            lambda: fibtrace::GOLDEN * fibtrace::GOLDEN,
            epsilon: 0.1,
            delta: 1e-3,
            n: 200,
            c1: 1.0,
            c2: 1.0,
            eta: 0.5,
            zeta: 0.1,
            n_ref: 200,
            slack_runs: 100,
            slack_max: 0.5,
            samples: 1000,
            coupling: 0.05,
            n_forward: 30,
            radius: 0.0,
            iteration_cap: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    pub coupling: f64,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub resolution: usize,
    pub tolerance: f64,
    pub per2: bool,
    pub per2_range: (f64, f64),
    pub per2_points: usize,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig {
            coupling: 0.01,
            x_range: (-2.0, 2.0),
            y_range: (-2.0, 2.0),
            resolution: 101,
            tolerance: 1e-9,
            per2: false,
            per2_range: (0.6, 1.4),
            per2_points: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubshiftConfig {
    pub n: usize,
}

impl Default for SubshiftConfig {
    fn default() -> Self {
        SubshiftConfig { n: 10 }
    }
}

fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Reads the file (if any), applies `key=value` overrides with dotted keys
/// and deserializes.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, CliError> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", p.display())))?;
            text.parse::<toml::Table>().map_err(|e| CliError::Config(format!("config {}: {e}", p.display())))?
        }
        None => toml::Table::new(),
    };
    for o in overrides {
        let (key, raw) = o
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override `{o}` is not of the form key=value")))?;
        let parts: Vec<&str> = key.trim().split('.').collect();
        let mut t = &mut table;
        for part in &parts[..parts.len() - 1] {
            let entry = t.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            t = entry
                .as_table_mut()
                .ok_or_else(|| CliError::Config(format!("override `{o}`: `{part}` is not a section")))?;
        }
        t.insert(parts[parts.len() - 1].to_string(), parse_value(raw.trim()));
    }
    toml::Value::Table(table)
        .try_into::<RunConfig>()
        .map_err(|e| CliError::Config(format!("config: {}", e.to_string().trim())))
}
