//! Flat `key = value` run configuration.
//!
//! ```text
//! # spots on a coarse sphere
//! mesh = icosphere:4:80
//! b = -0.2
//! eps = 1
//! dt = 0.1
//! iters = 1500
//! seed = 7
//! init = random
//! amplitude = 0.5
//! ```
//!
//! Blank lines and `#` comments are ignored. Every key can also be set
//! through [`RunConfig::set`], which is how command-line overrides are
//! applied on top of a file.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::mesh::{AreaConvention, TriangleMesh};
use crate::one_dim::{self, IntegrationSettings};
use crate::patterns::{self, PatternError, SupportRegion};
use crate::solver::{PhaseField, SolverConfig};

pub const DEFAULT_MESH: &str = "icosphere:4:80";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`: {message}")]
    InvalidValue {
        key: String,
        value: String,
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    Random,
    Localized,
}

impl FromStr for InitMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "random" => Ok(Self::Random),
            "localized" | "localised" => Ok(Self::Localized),
            other => Err(format!("expected random or localized, got `{other}`")),
        }
    }
}

impl fmt::Display for InitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Random => "random",
            Self::Localized => "localized",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitConfig {
    pub mode: InitMode,
    pub amplitude: f64,
    /// Center vertex of the localized ball.
    pub center: usize,
    /// Ball radius in edge hops.
    pub radius: usize,
    /// Value outside the ball.
    pub background: f64,
}

impl Default for InitConfig {
    fn default() -> Self {
        Self {
            mode: InitMode::Random,
            amplitude: patterns::DEFAULT_AMPLITUDE,
            center: 0,
            radius: 3,
            background: 0.0,
        }
    }
}

impl InitConfig {
    /// Initial field for `mesh`; the region is set for localized data.
    pub fn build(&self, mesh: &TriangleMesh, seed: u64) -> Result<(PhaseField, Option<SupportRegion>), PatternError> {
        match self.mode {
            InitMode::Random => Ok((patterns::random_init(mesh.vertex_count(), seed, self.amplitude)?, None)),
            InitMode::Localized => {
                let (u, region) =
                    patterns::localized_init(mesh, seed, self.center, self.radius, self.amplitude, self.background)?;
                Ok((u, Some(region)))
            }
        }
    }
}

/// Launch data for a stationary 1D profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneDimConfig {
    pub u0: f64,
    pub du0: f64,
    pub x_start: f64,
    pub x_end: f64,
    pub samples: usize,
    pub tolerance: f64,
}

impl Default for OneDimConfig {
    fn default() -> Self {
        let (u0, du0) = one_dim::CANONICAL_LAUNCH;
        let (x_start, x_end) = one_dim::CANONICAL_WINDOW;
        Self {
            u0,
            du0,
            x_start,
            x_end,
            samples: 151,
            tolerance: one_dim::DEFAULT_TOLERANCE,
        }
    }
}

impl OneDimConfig {
    pub fn settings(&self) -> IntegrationSettings {
        IntegrationSettings {
            tolerance: self.tolerance,
            samples: self.samples,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    /// A mesh file path or a builtin spec such as `icosphere:4:80`.
    pub mesh: String,
    pub solver: SolverConfig,
    pub init: InitConfig,
    pub dead_band: f64,
    /// Values of `b` for a sweep.
    pub b_list: Vec<f64>,
    pub one_dim: OneDimConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mesh: DEFAULT_MESH.to_string(),
            solver: SolverConfig::default(),
            init: InitConfig::default(),
            dead_band: patterns::DEFAULT_DEAD_BAND,
            b_list: Vec::new(),
            one_dim: OneDimConfig::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        message: e.to_string(),
    })
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value
        .split([',', ' '])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn fmt_list(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Parses a config file body on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut config = Self::default();
        config.apply(text)?;
        Ok(config)
    }

    /// Applies every `key = value` line of `text`.
    pub fn apply(&mut self, text: &str) -> Result<(), ConfigError> {
        for (index, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: index + 1,
                    message: format!("expected `key = value`, got `{line}`"),
                });
            };
            self.set(key.trim(), value.trim()).map_err(|e| match e {
                ConfigError::UnknownKey(k) => ConfigError::Syntax {
                    line: index + 1,
                    message: format!("unknown key `{k}`"),
                },
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let s = &mut self.solver;
        match key {
            "mesh" => self.mesh = value.to_string(),
            "b" => s.b = parse(key, value)?,
            "eps" | "epsilon" => s.epsilon = parse(key, value)?,
            "dt" => s.dt = parse(key, value)?,
            "iters" | "iterations" | "max_iterations" => s.max_iterations = parse(key, value)?,
            "seed" => s.seed = parse(key, value)?,
            "stop_tolerance" => s.stop_tolerance = parse(key, value)?,
            "energy_log_stride" => s.energy_log_stride = parse(key, value)?,
            "linear_tolerance" => s.linear_tolerance = parse(key, value)?,
            "linear_max_iterations" => {
                s.linear_max_iterations = match value.trim() {
                    "" | "auto" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "area_convention" | "areas" => s.area_convention = parse::<AreaConvention>(key, value)?,
            "init" => self.init.mode = parse(key, value)?,
            "amplitude" => self.init.amplitude = parse(key, value)?,
            "center" => self.init.center = parse(key, value)?,
            "radius" => self.init.radius = parse(key, value)?,
            "background" => self.init.background = parse(key, value)?,
            "dead_band" => self.dead_band = parse(key, value)?,
            "b_list" => self.b_list = parse_list(key, value)?,
            "u0" => self.one_dim.u0 = parse(key, value)?,
            "du0" => self.one_dim.du0 = parse(key, value)?,
            "x_start" => self.one_dim.x_start = parse(key, value)?,
            "x_end" => self.one_dim.x_end = parse(key, value)?,
            "samples" => self.one_dim.samples = parse(key, value)?,
            "ode_tolerance" => self.one_dim.tolerance = parse(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Every setting as `(key, value)`, in a fixed order. Feeding these
    /// back through [`RunConfig::set`] reproduces the config.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let s = &self.solver;
        vec![
            ("mesh", self.mesh.clone()),
            ("b", s.b.to_string()),
            ("eps", s.epsilon.to_string()),
            ("dt", s.dt.to_string()),
            ("iters", s.max_iterations.to_string()),
            ("seed", s.seed.to_string()),
            ("stop_tolerance", s.stop_tolerance.to_string()),
            ("energy_log_stride", s.energy_log_stride.to_string()),
            ("linear_tolerance", s.linear_tolerance.to_string()),
            (
                "linear_max_iterations",
                s.linear_max_iterations.map_or("auto".to_string(), |n| n.to_string()),
            ),
            ("area_convention", s.area_convention.to_string()),
            ("init", self.init.mode.to_string()),
            ("amplitude", self.init.amplitude.to_string()),
            ("center", self.init.center.to_string()),
            ("radius", self.init.radius.to_string()),
            ("background", self.init.background.to_string()),
            ("dead_band", self.dead_band.to_string()),
            ("b_list", fmt_list(&self.b_list)),
            ("u0", self.one_dim.u0.to_string()),
            ("du0", self.one_dim.du0.to_string()),
            ("x_start", self.one_dim.x_start.to_string()),
            ("x_end", self.one_dim.x_end.to_string()),
            ("samples", self.one_dim.samples.to_string()),
            ("ode_tolerance", self.one_dim.tolerance.to_string()),
        ]
    }

    /// `key = value` lines, as accepted by [`RunConfig::parse`].
    pub fn to_text(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

/// What a command-line invocation was asked to do, written next to its
/// outputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub mesh: String,
    pub output_dir: PathBuf,
    pub config: RunConfig,
    /// Files written, relative to `output_dir`.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}
