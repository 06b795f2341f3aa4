//! The generic SMC sampler: multinomial resampling at every step, IID
//! uniforms pushed through the model's `gamma` transforms.

use crate::error::{Error, Result};
use crate::fk::{run_filter, FeynmanKac, ParticleSystem, RunResult, StepSource, TestFn};
use crate::resample::multinomial_ancestors;
use crate::rng::{derive_seed, fill_uniform, Purpose};

#[derive(Debug, Clone)]
pub struct SmcConfig {
    pub n_particles: usize,
    pub horizon: usize,
    pub seed: u64,
    pub test_fns: Vec<TestFn>,
}

impl SmcConfig {
    pub fn new(n_particles: usize, horizon: usize, seed: u64) -> Self {
        Self {
            n_particles,
            horizon,
            seed,
            test_fns: vec![TestFn::component(0)],
        }
    }

    pub fn with_test_fns(mut self, test_fns: Vec<TestFn>) -> Self {
        self.test_fns = test_fns;
        self
    }
}

struct IidSource {
    seed: u64,
}

impl StepSource for IidSource {
    fn initial_uniforms(&mut self, n: usize, dim: usize) -> Result<Vec<f64>> {
        let mut u = vec![0.0; n * dim];
        fill_uniform(self.seed, Purpose::Initial, 0, &mut u);
        Ok(u)
    }

    fn step(
        &mut self,
        t: usize,
        model: &dyn FeynmanKac,
        system: &ParticleSystem,
    ) -> Result<(Vec<usize>, Vec<f64>)> {
        let n = system.len();
        let ancestors =
            multinomial_ancestors(system.weights(), n, derive_seed(self.seed, &[t as u64]))?;
        let mut v = vec![0.0; n * model.dim()];
        fill_uniform(self.seed, Purpose::Propagate, t as u64, &mut v);
        Ok((ancestors, v))
    }
}

pub fn run_smc(model: &dyn FeynmanKac, cfg: &SmcConfig) -> Result<RunResult> {
    if cfg.n_particles < 2 {
        return Err(Error::InvalidArgument(
            "SMC needs at least two particles".into(),
        ));
    }
    let mut source = IidSource { seed: cfg.seed };
    let (moments, log_likelihood, wall_time) = run_filter(
        model,
        cfg.n_particles,
        cfg.horizon,
        &cfg.test_fns,
        &mut source,
    )?;
    Ok(RunResult {
        engine: "smc".into(),
        seed: cfg.seed,
        n_particles: cfg.n_particles,
        test_fns: cfg.test_fns.iter().map(|f| f.name().to_string()).collect(),
        moments,
        log_likelihood,
        unscrambled_qmc: false,
        wall_time,
    })
}
