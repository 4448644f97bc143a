//! Simulation configuration.
//!
//! Configurations are JSON documents carrying `schema_version`; every
//! section is optional and falls back to the defaults in
//! `configs/default.json`. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::crossbar::BiasScheme;
use crate::device::{DeviceParams, UpdateScheme};
use crate::error::{Error, Result};
use crate::inference::{MlpSpec, Programming, TrainOptions};
use crate::stochastic::VariabilityParams;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossbarConfig {
    pub rows: usize,
    pub cols: usize,
    pub bias: BiasScheme,
}

impl Default for CrossbarConfig {
    fn default() -> Self {
        Self {
            rows: 64,
            cols: 64,
            bias: BiasScheme::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InferenceConfig {
    /// Layer widths including input and output.
    pub layers: Vec<usize>,
    pub programming: Programming,
    /// Read voltage standing for the largest input (V).
    pub v_read: f64,
    /// Number of Monte-Carlo programming seeds.
    pub seeds: usize,
    pub train: TrainOptions,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self {
            layers: vec![16, 16, 4],
            programming: Programming::default(),
            v_read: 0.1,
            seeds: 10,
            train: TrainOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub schema_version: u32,
    pub device: DeviceParams,
    pub variability: VariabilityParams,
    pub crossbar: CrossbarConfig,
    pub scheme: UpdateScheme,
    pub inference: InferenceConfig,
    /// Master seed; every random stream is derived from it.
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            device: DeviceParams::default(),
            variability: VariabilityParams::default(),
            crossbar: CrossbarConfig::default(),
            scheme: UpdateScheme::AmplitudeRamp,
            inference: InferenceConfig::default(),
            seed: 1,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl SimConfig {
    /// Parse and validate a JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SimConfig = serde_json::from_str(text).map_err(|e| {
            let field = if e.is_syntax() || e.is_eof() {
                "<syntax>"
            } else {
                "<document>"
            };
            Error::config(field, e.to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("<file>", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!(
                    "unsupported version {}, expected {SCHEMA_VERSION}",
                    self.schema_version
                ),
            ));
        }
        self.device.validate().map_err(|e| match e {
            Error::Config { field, reason } if field.starts_with("conduction.") => Error::Config {
                field: format!("device.{field}"),
                reason,
            },
            other => other,
        })?;
        self.variability.validate()?;
        let xb = &self.crossbar;
        if xb.rows == 0 || xb.cols == 0 {
            return Err(Error::config(
                "crossbar.rows",
                "array must have at least one row and column",
            ));
        }
        xb.bias
            .validate(&self.device)
            .map_err(|e| prefix_field(e, "crossbar"))?;
        let inf = &self.inference;
        MlpSpec::new(inf.layers.clone()).map_err(|e| as_config(e, "inference.layers"))?;
        if !(inf.v_read.is_finite()
            && inf.v_read > 0.0
            && inf.v_read <= self.device.conduction.v_ohmic_max)
        {
            return Err(Error::config(
                "inference.v_read",
                format!("must lie in (0, {}]", self.device.conduction.v_ohmic_max),
            ));
        }
        if inf.seeds == 0 {
            return Err(Error::config("inference.seeds", "must be >= 1"));
        }
        if let Programming::WriteVerify { tol, max_iters } = inf.programming {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(Error::config("inference.programming.tol", "must be > 0"));
            }
            if max_iters == 0 {
                return Err(Error::config(
                    "inference.programming.max_iters",
                    "must be >= 1",
                ));
            }
        }
        let t = &inf.train;
        if t.epochs == 0 {
            return Err(Error::config("inference.train.epochs", "must be >= 1"));
        }
        if !(t.learning_rate.is_finite() && t.learning_rate > 0.0) {
            return Err(Error::config(
                "inference.train.learning_rate",
                "must be > 0",
            ));
        }
        if !(t.momentum.is_finite() && (0.0..1.0).contains(&t.momentum)) {
            return Err(Error::config(
                "inference.train.momentum",
                "must lie in [0, 1)",
            ));
        }
        Ok(())
    }
}

fn prefix_field(e: Error, section: &str) -> Error {
    match e {
        Error::Config { field, reason } => Error::Config {
            field: format!("{section}.{field}"),
            reason,
        },
        other => as_config(other, section),
    }
}

fn as_config(e: Error, field: &str) -> Error {
    match e {
        Error::InvalidInput { reason, .. } => Error::config(field, reason),
        other => Error::config(field, other.to_string()),
    }
}
