use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::brownian::Construction;
use crate::error::{Error, Result};
use crate::models::{DiffusionParams, Formalism};

/// Model section of an experiment file, selected by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelConfig {
    LinGauss {
        #[serde(default = "one")]
        dim: usize,
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    StochVol {
        #[serde(default = "default_sv_mu")]
        mu: f64,
        #[serde(default = "default_sv_phi")]
        phi: f64,
        #[serde(default = "default_sv_sigma")]
        sigma: f64,
    },
    RareEvent {
        #[serde(default)]
        phi: f64,
    },
    Diffusion {
        #[serde(default = "default_steps")]
        steps: usize,
        #[serde(default = "default_fine_steps")]
        fine_steps: usize,
        #[serde(default = "default_construction")]
        construction: Construction,
        #[serde(default = "yes")]
        use_lambda: bool,
        #[serde(flatten)]
        params: DiffusionParams,
    },
}

fn one() -> usize {
    1
}
fn yes() -> bool {
    true
}
fn default_alpha() -> f64 {
    0.4
}
fn default_sv_mu() -> f64 {
    -1.0
}
fn default_sv_phi() -> f64 {
    0.9
}
fn default_sv_sigma() -> f64 {
    0.3
}
fn default_steps() -> usize {
    5
}
fn default_fine_steps() -> usize {
    200
}
fn default_construction() -> Construction {
    Construction::Bridge
}

impl ModelConfig {
    pub fn id(&self) -> &'static str {
        match self {
            ModelConfig::LinGauss { .. } => "lin_gauss",
            ModelConfig::StochVol { .. } => "stoch_vol",
            ModelConfig::RareEvent { .. } => "rare_event",
            ModelConfig::Diffusion { .. } => "diffusion",
        }
    }

    /// Euler grid size, or 1 for discrete-time models.
    pub fn steps(&self) -> usize {
        match self {
            ModelConfig::Diffusion { steps, .. } => *steps,
            _ => 1,
        }
    }

    pub fn has_oracle(&self) -> bool {
        matches!(self, ModelConfig::LinGauss { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampler {
    Smc,
    Sqmc,
}

/// One engine: sampler, formalism and (for diffusions) path construction,
/// written `smc-guided`, `sqmc-bootstrap-bridge`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EngineSpec {
    pub sampler: Sampler,
    pub formalism: Formalism,
    pub construction: Option<Construction>,
}

impl EngineSpec {
    pub fn label(&self) -> String {
        self.to_string()
    }

    pub fn construction_str(&self) -> &'static str {
        self.construction.map_or("none", |c| c.as_str())
    }
}

impl fmt::Display for EngineSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sampler = match self.sampler {
            Sampler::Smc => "smc",
            Sampler::Sqmc => "sqmc",
        };
        write!(f, "{sampler}-{}", self.formalism.as_str())?;
        if let Some(c) = self.construction {
            write!(f, "-{}", c.as_str())?;
        }
        Ok(())
    }
}

impl FromStr for EngineSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Config(format!(
                "unknown engine `{s}`; expected e.g. smc-guided or sqmc-bootstrap-bridge"
            ))
        };
        let parts: Vec<&str> = s.trim().split('-').collect();
        if parts.len() < 2 || parts.len() > 3 {
            return Err(bad());
        }
        let sampler = match parts[0] {
            "smc" => Sampler::Smc,
            "sqmc" => Sampler::Sqmc,
            _ => return Err(bad()),
        };
        let formalism = match parts[1] {
            "bootstrap" => Formalism::Bootstrap,
            "guided" => Formalism::Guided,
            _ => return Err(bad()),
        };
        let construction = match parts.get(2) {
            None => None,
            Some(&"forward") => Some(Construction::Forward),
            Some(&"bridge") => Some(Construction::Bridge),
            Some(_) => return Err(bad()),
        };
        Ok(Self {
            sampler,
            formalism,
            construction,
        })
    }
}

impl Serialize for EngineSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for EngineSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Quantity whose error or spread across replications defines the gains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    MeanX1,
    LogLikelihood,
}

impl Quantity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Quantity::MeanX1 => "estimate_mean_x1",
            Quantity::LogLikelihood => "log_likelihood",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub engines: Vec<EngineSpec>,
    pub particles: Vec<usize>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    /// Engine whose gain is 1 by definition; defaults to the first engine.
    #[serde(default)]
    pub reference: Option<EngineSpec>,
    /// Defaults to `estimate_mean_x1` when an exact oracle exists and to
    /// `log_likelihood` otherwise.
    #[serde(default)]
    pub quantity: Option<Quantity>,
    /// Worker threads; 0 lets the thread pool decide.
    #[serde(default)]
    pub workers: usize,
}

fn default_replications() -> usize {
    50
}

/// A complete experiment file. See the README for the schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub horizon: usize,
    /// Observation file written by `sqmc simulate`; simulated from `seed`
    /// when absent.
    #[serde(default)]
    pub data: Option<PathBuf>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub model: ModelConfig,
    pub run: RunSection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(data), Some(dir)) = (cfg.data.as_mut(), path.parent()) {
            if data.is_relative() {
                *data = dir.join(&*data);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn reference(&self) -> EngineSpec {
        self.run.reference.unwrap_or(self.run.engines[0])
    }

    pub fn quantity(&self) -> Quantity {
        self.run.quantity.unwrap_or(if self.model.has_oracle() {
            Quantity::MeanX1
        } else {
            Quantity::LogLikelihood
        })
    }

    pub fn validate(&self) -> Result<()> {
        let run = &self.run;
        if run.engines.is_empty() {
            return Err(Error::Config("at least one engine is required".into()));
        }
        if run.particles.is_empty() || run.particles.iter().any(|&n| n < 2) {
            return Err(Error::Config("particle counts must be at least 2".into()));
        }
        if run.replications < 2 {
            return Err(Error::Config(
                "variance estimates need at least 2 replications".into(),
            ));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be positive".into()));
        }
        for (i, e) in run.engines.iter().enumerate() {
            if run.engines[..i].contains(e) {
                return Err(Error::Config(format!("engine {e} listed twice")));
            }
            check_engine(&self.model, e)?;
        }
        if !run.engines.contains(&self.reference()) {
            return Err(Error::Config(format!(
                "reference engine {} is not in the engine list",
                self.reference()
            )));
        }
        match &self.model {
            ModelConfig::LinGauss { dim, .. } if *dim == 0 => {
                Err(Error::Config("dim must be positive".into()))
            }
            ModelConfig::Diffusion {
                steps,
                fine_steps,
                params,
                ..
            } => {
                if *steps == 0 || *fine_steps == 0 {
                    return Err(Error::Config(
                        "steps and fine_steps must be positive".into(),
                    ));
                }
                params.validate()
            }
            _ => Ok(()),
        }
    }
}

fn check_engine(model: &ModelConfig, e: &EngineSpec) -> Result<()> {
    let mismatch = |why: &str| {
        Err(Error::Config(format!(
            "engine {e} does not apply to model {}: {why}",
            model.id()
        )))
    };
    match model {
        ModelConfig::Diffusion { .. } => {
            if e.formalism == Formalism::Guided {
                return mismatch("only the bootstrap formalism is available");
            }
        }
        _ => {
            if e.construction.is_some() {
                return mismatch("path constructions apply to the diffusion model only");
            }
        }
    }
    Ok(())
}
