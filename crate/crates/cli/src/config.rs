//! Run configuration, read from a TOML file.
//!
//! ```toml
//! analysis = "dispersion"          # optional; must match the subcommand
//! tolerance = 1e-6                 # optional; used by `validate`
//!
//! [model]
//! type = "lorentz"                 # lossless | lorentz | point_scatter | vacuum
//! omega_c = 0.5
//! kappa0 = 0.01
//! cutoff = 10.0                    # or "infinite"
//!
//! [k_grid]
//! min = 0.1
//! max = 3.0
//! count = 300
//! spacing = "linear"               # or "log"
//!
//! [t_grid]                         # coeffs, emission, validate
//! min = 0.0
//! max = 600.0
//! count = 301
//!
//! [emission]
//! omega_a = 1.0
//! conv_cutoff = 50.0
//! method = "direct"                # direct | contour | asymptotic
//!
//! [output]
//! path = "fig1.csv"
//! format = "csv"                   # or "json"
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use polariton::emission::{EmissionMethod, EmissionParams};
use polariton::{
    Cutoff, DielectricModel, LorentzCutoffModel, LosslessModel, PointScatterCutoffModel,
};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Analysis {
    Dispersion,
    Sumrules,
    Coeffs,
    Emission,
    Validate,
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Analysis::Dispersion => "dispersion",
            Analysis::Sumrules => "sumrules",
            Analysis::Coeffs => "coeffs",
            Analysis::Emission => "emission",
            Analysis::Validate => "validate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub analysis: Option<Analysis>,
    pub tolerance: Option<f64>,
    pub model: ModelSpec,
    pub k_grid: Option<GridSpec>,
    pub t_grid: Option<GridSpec>,
    pub emission: Option<EmissionSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Lossless {
        omega_c: f64,
    },
    Lorentz {
        omega_c: f64,
        kappa0: f64,
        cutoff: CutoffSpec,
    },
    PointScatter {
        omega_c: f64,
        kappa: f64,
        cutoff: f64,
    },
    Vacuum {},
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CutoffSpec {
    Finite(f64),
    Named(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmissionSpec {
    pub omega_a: f64,
    pub conv_cutoff: f64,
    #[serde(default = "default_method")]
    pub method: EmissionMethod,
}

fn default_method() -> EmissionMethod {
    EmissionMethod::Direct
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

/// A problem with the configuration; reported with exit status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<polariton::Error> for ConfigError {
    fn from(e: polariton::Error) -> Self {
        ConfigError(e.to_string())
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|ConfigError(m)| ConfigError(format!("{}: {m}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        config.model()?;
        for grid in [&config.k_grid, &config.t_grid].into_iter().flatten() {
            grid.values()?;
        }
        if let Some(t) = config.tolerance {
            if !(t > 0.0) {
                return Err(ConfigError(format!("tolerance must be > 0, got {t}")));
            }
        }
        Ok(config)
    }

    pub fn model(&self) -> Result<DielectricModel, ConfigError> {
        Ok(match &self.model {
            ModelSpec::Lossless { omega_c } => LosslessModel::new(*omega_c)?.into(),
            ModelSpec::Lorentz {
                omega_c,
                kappa0,
                cutoff,
            } => {
                let cutoff = match cutoff {
                    CutoffSpec::Finite(x) => Cutoff::Finite(*x),
                    CutoffSpec::Named(s) if s == "infinite" || s == "inf" => Cutoff::Infinite,
                    CutoffSpec::Named(s) => {
                        return Err(ConfigError(format!(
                            "cutoff must be a number or \"infinite\", got \"{s}\""
                        )))
                    }
                };
                LorentzCutoffModel::new(*omega_c, *kappa0, cutoff)?.into()
            }
            ModelSpec::PointScatter {
                omega_c,
                kappa,
                cutoff,
            } => PointScatterCutoffModel::new(*omega_c, *kappa, *cutoff)?.into(),
            ModelSpec::Vacuum {} => DielectricModel::Vacuum,
        })
    }

    pub fn k_values(&self) -> Result<Vec<f64>, ConfigError> {
        self.k_grid
            .as_ref()
            .ok_or_else(|| ConfigError("missing [k_grid] section".into()))?
            .values()
    }

    pub fn t_values(&self) -> Result<Vec<f64>, ConfigError> {
        self.t_grid
            .as_ref()
            .ok_or_else(|| ConfigError("missing [t_grid] section".into()))?
            .values()
    }

    pub fn emission_params(&self) -> Result<Option<(EmissionParams, EmissionMethod)>, ConfigError> {
        let Some(spec) = &self.emission else {
            return Ok(None);
        };
        let params = EmissionParams::new(self.model()?, spec.omega_a, spec.conv_cutoff)?;
        Ok(Some((params, spec.method)))
    }
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>, ConfigError> {
        if self.count < 2 {
            return Err(ConfigError(format!(
                "grid count must be >= 2, got {}",
                self.count
            )));
        }
        if !(self.min < self.max) || !self.min.is_finite() || !self.max.is_finite() {
            return Err(ConfigError(format!(
                "grid needs finite min < max, got [{}, {}]",
                self.min, self.max
            )));
        }
        let last = (self.count - 1) as f64;
        Ok(match self.spacing {
            Spacing::Linear => (0..self.count)
                .map(|i| self.min + (self.max - self.min) * i as f64 / last)
                .collect(),
            Spacing::Log => {
                if !(self.min > 0.0) {
                    return Err(ConfigError("log-spaced grid needs min > 0".into()));
                }
                let ratio = (self.max / self.min).ln();
                (0..self.count)
                    .map(|i| self.min * (ratio * i as f64 / last).exp())
                    .collect()
            }
        })
    }
}
