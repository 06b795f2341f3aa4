//! Replication harness: simulate data, run every engine `R` times per
//! particle count, and summarise the spread of the estimates as gains
//! relative to a reference engine.

mod config;
mod data;
mod report;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{EngineSpec, ExperimentConfig, ModelConfig, Quantity, RunSection, Sampler};
pub use data::{read_dataset, write_dataset};
pub use report::{gain_table, quantiles, GainSummary, GainTable, ReportRow, Summary};

use crate::error::{Error, Result};
use crate::fk::{FeynmanKac, RunResult};
use crate::kalman::kalman_filter;
use crate::models::{Dataset, DiffusionSvModel, LinGaussModel, RareEventModel, StochVolModel};
use crate::rng::{derive_seed, Purpose};
use crate::smc::{run_smc, SmcConfig};
use crate::sqmc::{run_sqmc, SqmcConfig};

/// One row of the runs file: the estimates of one replication at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub model: String,
    pub engine: String,
    pub formalism: String,
    pub construction: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub t: usize,
    pub replication: usize,
    pub estimate_mean_x1: f64,
    pub log_likelihood: f64,
}

/// A replication that stopped with an error, e.g. particle death.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub engine: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub replication: usize,
    pub error: String,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub records: Vec<RunRecord>,
    pub failures: Vec<Failure>,
    pub wall_seconds: f64,
}

/// Seed of replication `r`; shared by every engine and particle count.
pub fn replication_seed(master: u64, r: usize) -> u64 {
    derive_seed(master, &[Purpose::Replication as u64, r as u64])
}

/// Generates observations from the model's own dynamics.
pub fn simulate_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    let seed = derive_seed(cfg.seed, &[Purpose::Simulate as u64]);
    let t = cfg.horizon;
    Ok(match &cfg.model {
        ModelConfig::LinGauss { dim, alpha } => LinGaussModel::simulate(*dim, *alpha, t, seed),
        ModelConfig::StochVol { mu, phi, sigma } => {
            StochVolModel::simulate(*mu, *phi, *sigma, t, seed)
        }
        ModelConfig::RareEvent { .. } => Dataset {
            observations: vec![vec![1.0]; t + 1],
            latent: vec![Vec::new(); t + 1],
        },
        ModelConfig::Diffusion {
            params, fine_steps, ..
        } => DiffusionSvModel::simulate(params, t, *fine_steps, seed)?,
    })
}

/// Reads `cfg.data` when set, simulates otherwise.
pub fn load_or_simulate(cfg: &ExperimentConfig) -> Result<Dataset> {
    let data = match &cfg.data {
        Some(path) => read_dataset(path)?,
        None => simulate_dataset(cfg)?,
    };
    if data.horizon() < cfg.horizon {
        return Err(Error::Config(format!(
            "data covers {} steps, horizon is {}",
            data.horizon(),
            cfg.horizon
        )));
    }
    Ok(data)
}

pub fn build_model(
    cfg: &ExperimentConfig,
    data: &Dataset,
    engine: &EngineSpec,
) -> Result<Box<dyn FeynmanKac>> {
    let y = &data.observations[..=cfg.horizon];
    let scalar = || -> Result<Vec<f64>> {
        y.iter()
            .map(|row| {
                row.first()
                    .copied()
                    .ok_or_else(|| Error::Config("empty observation row".into()))
            })
            .collect()
    };
    Ok(match &cfg.model {
        ModelConfig::LinGauss { dim, alpha } => Box::new(LinGaussModel::new(
            *dim,
            *alpha,
            engine.formalism,
            y.to_vec(),
        )?),
        ModelConfig::StochVol { mu, phi, sigma } => Box::new(StochVolModel::new(
            *mu,
            *phi,
            *sigma,
            engine.formalism,
            scalar()?,
        )?),
        ModelConfig::RareEvent { phi } => Box::new(RareEventModel::new(*phi, engine.formalism)),
        ModelConfig::Diffusion {
            steps,
            construction,
            params,
            ..
        } => {
            let c = engine.construction.unwrap_or(*construction);
            Box::new(DiffusionSvModel::new(*params, *steps, c, scalar()?)?)
        }
    })
}

/// Runs one replication of one engine.
pub fn run_engine(
    cfg: &ExperimentConfig,
    model: &dyn FeynmanKac,
    engine: &EngineSpec,
    n: usize,
    seed: u64,
) -> Result<RunResult> {
    match engine.sampler {
        Sampler::Smc => run_smc(model, &SmcConfig::new(n, cfg.horizon, seed)),
        Sampler::Sqmc => {
            let lambda = matches!(
                cfg.model,
                ModelConfig::Diffusion {
                    use_lambda: true,
                    ..
                }
            );
            run_sqmc(
                model,
                &SqmcConfig::new(n, cfg.horizon, seed).with_lambda(lambda),
            )
        }
    }
}

/// Exact filtering means of the first component and log-likelihoods, when
/// the model admits them.
pub fn oracle(cfg: &ExperimentConfig, data: &Dataset) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    match &cfg.model {
        ModelConfig::LinGauss { dim, alpha } => {
            let f = LinGaussModel::new(
                *dim,
                *alpha,
                crate::models::Formalism::Bootstrap,
                data.observations.clone(),
            )?
            .transition();
            let states = kalman_filter(&f, &data.observations[..=cfg.horizon])?;
            Ok(Some((
                states.iter().map(|s| s.mean[0]).collect(),
                states.iter().map(|s| s.log_lik).collect(),
            )))
        }
        _ => Ok(None),
    }
}

/// Runs every (engine, N, replication) job, in parallel when `workers`
/// allows, and returns the records sorted by that key.
pub fn run_experiment(cfg: &ExperimentConfig, data: &Dataset) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let models: Vec<Box<dyn FeynmanKac>> = cfg
        .run
        .engines
        .iter()
        .map(|e| build_model(cfg, data, e))
        .collect::<Result<_>>()?;
    let mut jobs = Vec::new();
    for (ei, _) in cfg.run.engines.iter().enumerate() {
        for &n in &cfg.run.particles {
            for r in 0..cfg.run.replications {
                jobs.push((ei, n, r));
            }
        }
    }
    let run_job = |&(ei, n, r): &(usize, usize, usize)| {
        let engine = &cfg.run.engines[ei];
        (
            ei,
            n,
            r,
            run_engine(
                cfg,
                models[ei].as_ref(),
                engine,
                n,
                replication_seed(cfg.seed, r),
            ),
        )
    };
    let results: Vec<_> = if cfg.run.workers == 1 {
        jobs.iter().map(run_job).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.run.workers)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        pool.install(|| jobs.par_iter().map(run_job).collect())
    };

    let mut out = ExperimentOutput::default();
    for (ei, n, r, res) in results {
        let engine = &cfg.run.engines[ei];
        match res {
            Ok(run) => {
                out.wall_seconds += run.wall_time.as_secs_f64();
                for t in 0..=cfg.horizon {
                    out.records.push(RunRecord {
                        model: cfg.model.id().to_string(),
                        engine: engine.label(),
                        formalism: engine.formalism.as_str().to_string(),
                        construction: engine.construction_str().to_string(),
                        n,
                        m: cfg.model.steps(),
                        horizon: cfg.horizon,
                        t,
                        replication: r,
                        estimate_mean_x1: run.moments[0][t],
                        log_likelihood: run.log_likelihood[t],
                    });
                }
            }
            Err(e) => out.failures.push(Failure {
                engine: engine.label(),
                n,
                replication: r,
                error: e.to_string(),
            }),
        }
    }
    Ok(out)
}

pub fn write_runs(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_runs(path: &Path) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|rec| rec.map_err(Error::from))
        .collect()
}

pub fn write_failures(path: &Path, failures: &[Failure]) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(failures)?)?;
    Ok(())
}

pub fn read_failures(path: &Path) -> Result<Vec<Failure>> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
