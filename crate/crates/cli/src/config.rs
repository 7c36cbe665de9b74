use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::exit::Usage;

pub const CONFIG_ENV: &str = "DIFFRACTION_CHANNEL_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PupilShape {
    Circular,
    Slit,
    Rectangular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
pub enum GainName {
    #[value(name = "G1", alias = "g1")]
    G1,
    #[value(name = "G2", alias = "g2")]
    G2,
    #[value(name = "G3", alias = "g3")]
    G3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BandRegime {
    Near,
    Far,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SumMode {
    Discrete,
    Continuum,
}

/// Every setting the subcommands understand, as read from a config file
/// and then overlaid with command-line flags.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Settings {
    pub wavelength: Option<f64>,
    pub object_distance: Option<f64>,
    pub image_distance: Option<f64>,
    pub focal_length: Option<f64>,
    pub magnification: Option<f64>,
    pub pupil_radius: Option<f64>,
    pub object_size: Option<f64>,
    pub ratio: Option<f64>,
    pub far_threshold: Option<f64>,
    pub near_threshold: Option<f64>,

    pub dim: Option<usize>,
    pub pupil: Option<PupilShape>,
    pub aperture_scale: Option<f64>,
    pub aspect: Option<f64>,
    pub n_max: Option<usize>,
    pub quadrature_order: Option<usize>,
    pub no_tail_closure: Option<bool>,

    pub ratio_min: Option<f64>,
    pub ratio_max: Option<f64>,
    pub points: Option<usize>,

    pub nbar: Option<f64>,
    pub nth: Option<f64>,
    pub gain: Option<Vec<GainName>>,
    pub strict: Option<bool>,

    pub regime: Option<BandRegime>,
    pub power: Option<f64>,
    pub window: Option<f64>,
    pub omega: Option<f64>,
    pub delta_omega: Option<f64>,
    pub unbounded: Option<bool>,
    pub mode: Option<SumMode>,

    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub svg: Option<bool>,
    pub stamp: Option<bool>,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct GeometryArgs {
    /// Wavelength λ in meters [default: 5e-7]
    #[arg(long)]
    pub wavelength: Option<f64>,
    /// Object-to-lens distance D_o in meters [default: 1]
    #[arg(long)]
    pub object_distance: Option<f64>,
    /// Lens-to-image distance D_i in meters
    #[arg(long)]
    pub image_distance: Option<f64>,
    #[arg(long)]
    pub focal_length: Option<f64>,
    /// Magnification M [default: 1 unless D_i or f is given]
    #[arg(long)]
    pub magnification: Option<f64>,
    /// Lens radius R in meters [default: 1e-2]
    #[arg(long)]
    pub pupil_radius: Option<f64>,
    /// Object side L in meters
    #[arg(long, conflicts_with = "ratio")]
    pub object_size: Option<f64>,
    /// Object side in units of the Rayleigh length, L/x_R
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Far-field cut on L/x_R [default: 0.2]
    #[arg(long)]
    pub far_threshold: Option<f64>,
    /// Near-field cut on L/x_R [default: 5]
    #[arg(long)]
    pub near_threshold: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct TransferArgs {
    /// Transverse dimension, 1 or 2 [default: 1]
    #[arg(long)]
    pub dim: Option<usize>,
    /// Aperture shape [default: slit in 1D, circular in 2D]
    #[arg(long, value_enum)]
    pub pupil: Option<PupilShape>,
    /// Aperture size relative to the lens radius; 0 closes it [default: 1]
    #[arg(long)]
    pub aperture_scale: Option<f64>,
    /// Height-to-width ratio of a rectangular aperture [default: 1]
    #[arg(long)]
    pub aspect: Option<f64>,
    /// Largest mode index per axis [default: smallest adequate]
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Quadrature nodes per axis [default: automatic]
    #[arg(long)]
    pub quadrature_order: Option<usize>,
    /// Drop the correction for modes outside the grid
    #[arg(long)]
    pub no_tail_closure: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct OutputArgs {
    /// Output file; standard output when absent
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Record the wall-clock time in the metadata sidecar
    #[arg(long)]
    pub stamp: bool,
    /// JSON config file [env: DIFFRACTION_CHANNEL_CONFIG]
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

/// Drops unset flags so they do not shadow config-file values.
fn prune(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m.into_iter().filter(|(_, v)| !matches!(v, Value::Null | Value::Bool(false))).collect(),
        _ => Map::new(),
    }
}

fn read_file(path: &Path) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path).map_err(|e| Usage(format!("cannot read config {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(Usage(format!("config {} must hold a JSON object", path.display())).into()),
        Err(e) => Err(Usage(format!("config {}: {e}", path.display())).into()),
    }
}

impl Settings {
    /// The settings as a reusable config document, without the output
    /// destination so that data files do not depend on where they are written.
    pub fn echo(&self) -> Value {
        let mut m = prune(serde_json::to_value(self).unwrap_or(Value::Null));
        for key in ["output", "stamp", "svg"] {
            m.remove(key);
        }
        Value::Object(m)
    }
}

/// Config file (explicit path, else the environment variable) overlaid with
/// the flags in `layers`.
pub fn load(explicit: Option<&Path>, layers: &[Value]) -> Result<Settings> {
    let from_env = std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    let mut merged = match explicit.map(Path::to_path_buf).or(from_env) {
        Some(p) => read_file(&p)?,
        None => Map::new(),
    };
    for layer in layers {
        merged.extend(prune(layer.clone()));
    }
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| Usage(format!("invalid configuration: {e}")))
        .context("resolving configuration")
}
