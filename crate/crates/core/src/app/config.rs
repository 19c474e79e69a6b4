//! Run configuration: a TOML file with `model`, `grid`, `initial`,
//! `propagation`, `output` and `tolerances` tables. Unknown keys are errors.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{GcsError, Result};
use crate::gcs::ClassicalPoint;
use crate::grid::Grid;
use crate::model::PotentialModel;
use crate::propagator::{Mode, PropagatorConfig, Scheme};
use crate::tolerance::Tolerances;

/// Overrides `output.directory` when set and non-empty.
pub const OUTPUT_DIR_ENV: &str = "GCS_OUTPUT_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub grid: GridSection,
    #[serde(default)]
    pub initial: InitialSection,
    pub propagation: PropagationSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Harmonic,
    Morse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelName,
    #[serde(default = "one")]
    pub m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default = "one")]
    pub hbar: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(rename = "Q0", default)]
    pub q0: f64,
    #[serde(rename = "P0", default)]
    pub p0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationSection {
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "one_usize")]
    pub snapshot_stride: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default)]
    pub emit_fields: bool,
    #[serde(default = "yes")]
    pub emit_plots: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            directory: default_directory(),
            emit_fields: false,
            emit_plots: true,
        }
    }
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

fn yes() -> bool {
    true
}

fn default_directory() -> PathBuf {
    PathBuf::from("output")
}

impl ModelSection {
    pub fn build(&self) -> Result<PotentialModel> {
        match self.kind {
            ModelName::Harmonic => {
                if self.a.is_some() || self.lambda.is_some() {
                    return Err(GcsError::Config("harmonic model takes omega, not a or lambda".into()));
                }
                let omega = self
                    .omega
                    .ok_or_else(|| GcsError::Config("harmonic model needs omega".into()))?;
                PotentialModel::harmonic(self.m, omega, self.hbar)
            }
            ModelName::Morse => {
                if self.omega.is_some() {
                    return Err(GcsError::Config("morse model takes a and lambda, not omega".into()));
                }
                let a = self.a.ok_or_else(|| GcsError::Config("morse model needs a".into()))?;
                PotentialModel::morse(self.m, a, self.lambda.unwrap_or(1.0), self.hbar)
            }
        }
    }
}

impl RunConfig {
    /// Parses and validates a configuration.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| GcsError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GcsError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            GcsError::Config(msg) => GcsError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Checks everything that can be checked without propagating.
    pub fn validate(&self) -> Result<()> {
        self.model()?;
        self.grid()?;
        self.propagator()?.steps(self.propagation.t_final)?;
        let t = &self.tolerances;
        let positive = [t.norm, t.ground_norm, t.boundary_mass, t.phase_floor, t.curvature_floor, t.phase_jump, t.unitarity];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) || t.boundary_points == 0 {
            return Err(GcsError::Config("tolerances must be positive".into()));
        }
        if !(self.initial.q0.is_finite() && self.initial.p0.is_finite()) {
            return Err(GcsError::Config("initial Q0 and P0 must be finite".into()));
        }
        Ok(())
    }

    pub fn model(&self) -> Result<PotentialModel> {
        self.model.build()
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.x_min, self.grid.x_max, self.grid.n)
    }

    pub fn propagator(&self) -> Result<PropagatorConfig> {
        let p = &self.propagation;
        PropagatorConfig::new(p.dt, p.scheme, p.mode, p.snapshot_stride)
    }

    pub fn initial_point(&self) -> ClassicalPoint {
        ClassicalPoint::new(self.initial.q0, self.initial.p0, 0.0)
    }

    /// Applies the [`OUTPUT_DIR_ENV`] override.
    pub fn with_env_output(mut self) -> Self {
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV).filter(|d| !d.is_empty()) {
            self.output.directory = PathBuf::from(dir);
        }
        self
    }

    /// The effective configuration, defaults filled in.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| GcsError::Config(e.to_string()))
    }
}
