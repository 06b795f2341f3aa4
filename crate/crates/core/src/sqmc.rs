//! Sequential quasi-Monte Carlo.
//!
//! At each step `t >= 1` a fresh `(d + 1)`-dimensional scrambled Sobol'
//! block is drawn. Its first coordinate selects ancestors by inverse CDF
//! over the particles sorted along the Hilbert curve (or by value when the
//! ordering space is one-dimensional); the remaining `d` coordinates drive
//! `gamma`. The point whose first coordinate has rank `r` supplies both the
//! `r`-th sorted uniform and the `v` of the `r`-th new particle, so each
//! `(u, v)` pair stays together.

use crate::error::{Error, Result};
use crate::fk::{run_filter, FeynmanKac, ParticleSystem, RunResult, StepSource, TestFn};
use crate::hilbert::{argsort, hilbert_sort_permutation, HilbertConfig, PsiTransform};
use crate::lowdisc::{sobol_block, ScrambleState, SobolSpec};
use crate::resample::sorted_ancestors_by_state;

#[derive(Debug, Clone)]
pub struct SqmcConfig {
    pub n_particles: usize,
    pub horizon: usize,
    pub seed: u64,
    /// Randomise each point set with nested scrambling (RQMC). Without it
    /// the likelihood estimate is biased and replications are identical.
    pub scrambled: bool,
    /// Bits per axis of the Hilbert key; `floor(62 / k)` when unset.
    pub hilbert_bits: Option<u32>,
    /// Order particles by the model's `lambda` statistic.
    pub use_lambda: bool,
    pub test_fns: Vec<TestFn>,
}

impl SqmcConfig {
    pub fn new(n_particles: usize, horizon: usize, seed: u64) -> Self {
        Self {
            n_particles,
            horizon,
            seed,
            scrambled: true,
            hilbert_bits: None,
            use_lambda: false,
            test_fns: vec![TestFn::component(0)],
        }
    }

    pub fn with_lambda(mut self, use_lambda: bool) -> Self {
        self.use_lambda = use_lambda;
        self
    }

    pub fn with_scrambling(mut self, scrambled: bool) -> Self {
        self.scrambled = scrambled;
        self
    }

    pub fn with_test_fns(mut self, test_fns: Vec<TestFn>) -> Self {
        self.test_fns = test_fns;
        self
    }
}

struct QmcSource {
    seed: u64,
    scrambled: bool,
    ordering_dim: usize,
    use_lambda: bool,
    hilbert: HilbertConfig,
}

impl QmcSource {
    fn points(&self, t: usize, n: usize, dim: usize) -> Result<Vec<f64>> {
        let spec = SobolSpec::new(dim)?;
        let scramble = self
            .scrambled
            .then(|| ScrambleState::for_step(self.seed, t));
        Ok(sobol_block(&spec, scramble.as_ref(), n, 0)?
            .as_slice()
            .to_vec())
    }

    fn order(&self, model: &dyn FeynmanKac, system: &ParticleSystem) -> Result<Vec<usize>> {
        let k = self.ordering_dim;
        let projected;
        let points: &[f64] = if self.use_lambda {
            let mut buf = vec![0.0; system.len() * k];
            for (n, out) in buf.chunks_exact_mut(k).enumerate() {
                model.lambda(system.state(n), out);
            }
            projected = buf;
            &projected
        } else {
            system.states()
        };
        if k == 1 {
            if let Some(bad) = points.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "ordering value of particle {bad} is {}",
                    points[bad]
                )));
            }
            return Ok(argsort(points));
        }
        let psi = PsiTransform::from_cloud(points, k)?;
        hilbert_sort_permutation(points, &psi, &self.hilbert)
    }
}

impl StepSource for QmcSource {
    fn initial_uniforms(&mut self, n: usize, dim: usize) -> Result<Vec<f64>> {
        self.points(0, n, dim)
    }

    fn step(
        &mut self,
        t: usize,
        model: &dyn FeynmanKac,
        system: &ParticleSystem,
    ) -> Result<(Vec<usize>, Vec<f64>)> {
        let n = system.len();
        let d = model.dim();
        let block = self.points(t, n, d + 1)?;
        let u: Vec<f64> = block.iter().step_by(d + 1).copied().collect();
        let rank = argsort(&u);
        let u_sorted: Vec<f64> = rank.iter().map(|&i| u[i]).collect();
        let order = self.order(model, system)?;
        let ancestors = sorted_ancestors_by_state(&u_sorted, system.weights(), &order)?;
        let mut v = Vec::with_capacity(n * d);
        for &i in &rank {
            v.extend_from_slice(&block[i * (d + 1) + 1..(i + 1) * (d + 1)]);
        }
        Ok((ancestors, v))
    }
}

pub fn run_sqmc(model: &dyn FeynmanKac, cfg: &SqmcConfig) -> Result<RunResult> {
    if cfg.n_particles < 2 {
        return Err(Error::InvalidArgument(
            "SQMC needs at least two particles".into(),
        ));
    }
    let ordering_dim = if cfg.use_lambda {
        model.lambda_dim().ok_or_else(|| {
            Error::InvalidArgument("lambda ordering requested but the model has no lambda".into())
        })?
    } else {
        model.dim()
    };
    let hilbert = match cfg.hilbert_bits {
        Some(bits) => HilbertConfig::new(ordering_dim, bits)?,
        None => HilbertConfig::with_default_bits(ordering_dim)?,
    };
    let mut source = QmcSource {
        seed: cfg.seed,
        scrambled: cfg.scrambled,
        ordering_dim,
        use_lambda: cfg.use_lambda,
        hilbert,
    };
    let (moments, log_likelihood, wall_time) = run_filter(
        model,
        cfg.n_particles,
        cfg.horizon,
        &cfg.test_fns,
        &mut source,
    )?;
    Ok(RunResult {
        engine: "sqmc".into(),
        seed: cfg.seed,
        n_particles: cfg.n_particles,
        test_fns: cfg.test_fns.iter().map(|f| f.name().to_string()).collect(),
        moments,
        log_likelihood,
        unscrambled_qmc: !cfg.scrambled,
        wall_time,
    })
}
