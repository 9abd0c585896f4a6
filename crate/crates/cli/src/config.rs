//! Run configuration: one strict JSON document.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thermocap_core::{BulkConditions, FluidParams, GridConfig, NewtonOptions, SweepConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

/// Exactly one of `T0` and `delta_T`; `mu1` defaults to `mu_c`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBulk {
    #[serde(rename = "T0")]
    t0: Option<f64>,
    #[serde(rename = "delta_T")]
    delta_t: Option<f64>,
    mu1: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRunConfig {
    params: FluidParams,
    bc: RawBulk,
    #[serde(default)]
    grid: GridConfig,
    #[serde(default)]
    newton: NewtonOptions,
    sweep: Option<SweepConfig>,
    output_dir: Option<PathBuf>,
    format: Option<Format>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: FluidParams,
    pub bc: BulkConditions,
    pub grid: GridConfig,
    pub newton: NewtonOptions,
    pub sweep: Option<SweepConfig>,
    pub output_dir: Option<PathBuf>,
    pub format: Option<Format>,
}

impl Default for RunConfig {
    /// Reference fluid at `delta_T = 0.01`.
    fn default() -> Self {
        let params = FluidParams::reference();
        Self {
            bc: BulkConditions::from_delta_t(&params, 0.01).expect("reference conditions"),
            params,
            grid: GridConfig::default(),
            newton: NewtonOptions::default(),
            sweep: None,
            output_dir: None,
            format: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        let raw: RawRunConfig = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let params = raw.params;
        let bc = match (raw.bc.t0, raw.bc.delta_t) {
            (Some(t0), None) => BulkConditions::from_temperature(&params, t0),
            (None, Some(dt)) => BulkConditions::from_delta_t(&params, dt),
            _ => return Err("bc needs exactly one of `T0` and `delta_T`".into()),
        }
        .map_err(|e| e.to_string())?;
        let bc = match raw.bc.mu1 {
            Some(mu1) if !mu1.is_finite() => return Err("bc.mu1 must be finite".into()),
            Some(mu1) => bc.with_mu1(mu1),
            None => bc,
        };
        Ok(Self {
            params,
            bc,
            grid: raw.grid,
            newton: raw.newton,
            sweep: raw.sweep,
            output_dir: raw.output_dir,
            format: raw.format,
        })
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// The configured sweep, or the default ΔT decades on this config's
    /// grid and Newton settings.
    pub fn sweep_or_default(&self) -> SweepConfig {
        self.sweep.clone().unwrap_or_else(|| {
            SweepConfig::new(
                SweepConfig::DEFAULT_DELTA_T.to_vec(),
                false,
                self.grid,
                self.newton,
            )
            .expect("default sweep is valid")
        })
    }
}
