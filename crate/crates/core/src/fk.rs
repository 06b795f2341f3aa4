//! Feynman-Kac models and the particle-system bookkeeping shared by the
//! SMC and SQMC samplers. Weights live in log space throughout.

use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::resample::WeightVector;

/// A Feynman-Kac model expressed through deterministic transforms of
/// uniforms, as required by quasi-Monte Carlo samplers.
///
/// * `gamma0(u)` maps `u ~ U[0,1]^d` to a draw from the initial law `M_0`;
/// * `gamma(t, x_prev, v)` maps `v ~ U[0,1]^d` to a draw from `M_t(x_prev, .)`;
/// * `log_g0` and `log_g` are the log-potentials (`-inf` for a zero
///   potential, never NaN).
///
/// A model may expose a statistic `lambda(x)` of dimension `k < d` such that
/// `gamma` and `log_g` depend on `x_prev` only through `lambda(x_prev)`.
/// SQMC can then order particles in dimension `k` instead of `d`.
pub trait FeynmanKac: Send + Sync {
    fn dim(&self) -> usize;

    fn gamma0(&self, u: &[f64], x: &mut [f64]) -> Result<()>;

    fn gamma(&self, t: usize, x_prev: &[f64], v: &[f64], x: &mut [f64]) -> Result<()>;

    fn log_g0(&self, x: &[f64]) -> f64;

    fn log_g(&self, t: usize, x_prev: &[f64], x: &[f64]) -> f64;

    /// Largest time index the model has data for, if any.
    fn max_horizon(&self) -> Option<usize> {
        None
    }

    fn lambda_dim(&self) -> Option<usize> {
        None
    }

    fn lambda(&self, _x: &[f64], _out: &mut [f64]) {}
}

/// A named test function `phi` whose filtering expectation is recorded.
#[derive(Clone)]
pub struct TestFn {
    name: String,
    f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl TestFn {
    pub fn new(name: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// `phi(x) = x(k)` (0-based component).
    pub fn component(k: usize) -> Self {
        Self::new(format!("x{}", k + 1), move |x| x[k])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

impl fmt::Debug for TestFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("TestFn").field(&self.name).finish()
    }
}

impl Default for TestFn {
    fn default() -> Self {
        Self::component(0)
    }
}

/// Normalise log-weights. Returns the weights and
/// `log_mean = logsumexp(log_w) - log N`.
pub fn normalize_weights(log_w: &[f64], t: usize) -> Result<(WeightVector, f64)> {
    let mut max = f64::NEG_INFINITY;
    for (n, &lw) in log_w.iter().enumerate() {
        if lw.is_nan() || lw == f64::INFINITY {
            return Err(Error::NanWeight { t, particle: n });
        }
        max = max.max(lw);
    }
    if max == f64::NEG_INFINITY {
        return Err(Error::ParticleDeath { t });
    }
    let mut w: Vec<f64> = log_w.iter().map(|&lw| (lw - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    let log_mean = max + total.ln() - (log_w.len() as f64).ln();
    Ok((WeightVector::from_normalized_unchecked(w), log_mean))
}

/// `log L_t^N` as the sum of per-step log mean weights.
pub fn log_likelihood_estimate(increments: &[f64]) -> f64 {
    increments.iter().sum()
}

/// Particles at one time step.
#[derive(Debug, Clone)]
pub struct ParticleSystem {
    t: usize,
    dim: usize,
    states: Vec<f64>,
    log_weights: Vec<f64>,
    weights: WeightVector,
    ancestors: Vec<usize>,
    log_increments: Vec<f64>,
}

impl ParticleSystem {
    /// Time-0 system from an `n x d` row-major block of uniforms.
    pub fn initialize(model: &dyn FeynmanKac, uniforms: &[f64]) -> Result<Self> {
        let dim = model.dim();
        let n = uniforms.len() / dim;
        let mut states = vec![0.0; n * dim];
        for (x, u) in states.chunks_exact_mut(dim).zip(uniforms.chunks_exact(dim)) {
            model.gamma0(u, x)?;
        }
        let log_weights: Vec<f64> = states.chunks_exact(dim).map(|x| model.log_g0(x)).collect();
        let (weights, log_mean) = normalize_weights(&log_weights, 0)?;
        Ok(Self {
            t: 0,
            dim,
            states,
            log_weights,
            weights,
            ancestors: (0..n).collect(),
            log_increments: vec![log_mean],
        })
    }

    /// Move to `t + 1`: particle `n` descends from `ancestors[n]` and is
    /// driven by row `n` of `v` (`n x d`, row-major).
    pub fn advance(
        &mut self,
        model: &dyn FeynmanKac,
        ancestors: Vec<usize>,
        v: &[f64],
    ) -> Result<()> {
        let t = self.t + 1;
        let dim = self.dim;
        let n = ancestors.len();
        let mut states = vec![0.0; n * dim];
        let mut log_weights = Vec::with_capacity(n);
        for ((x, &a), vn) in states
            .chunks_exact_mut(dim)
            .zip(&ancestors)
            .zip(v.chunks_exact(dim))
        {
            let prev = &self.states[a * dim..(a + 1) * dim];
            model.gamma(t, prev, vn, x)?;
            log_weights.push(model.log_g(t, prev, x));
        }
        let (weights, log_mean) = normalize_weights(&log_weights, t)?;
        self.t = t;
        self.states = states;
        self.log_weights = log_weights;
        self.weights = weights;
        self.ancestors = ancestors;
        self.log_increments.push(log_mean);
        Ok(())
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn len(&self) -> usize {
        self.log_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn state(&self, n: usize) -> &[f64] {
        &self.states[n * self.dim..(n + 1) * self.dim]
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn ancestors(&self) -> &[usize] {
        &self.ancestors
    }

    pub fn log_increments(&self) -> &[f64] {
        &self.log_increments
    }

    pub fn log_likelihood(&self) -> f64 {
        log_likelihood_estimate(&self.log_increments)
    }

    /// Weighted estimate `sum_n W^n phi(X^n)`.
    pub fn moment(&self, phi: &TestFn) -> f64 {
        self.states
            .chunks_exact(self.dim)
            .zip(self.weights.as_slice())
            .filter(|(_, &w)| w > 0.0)
            .map(|(x, w)| w * phi.eval(x))
            .sum()
    }
}

/// Output of one filtering run, indexed by `t = 0..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub engine: String,
    pub seed: u64,
    pub n_particles: usize,
    pub test_fns: Vec<String>,
    /// `moments[k][t]`: estimate of the filtering expectation of test function `k`.
    pub moments: Vec<Vec<f64>>,
    /// `log L_t^N`.
    pub log_likelihood: Vec<f64>,
    /// Set for deterministic (unscrambled) QMC runs, whose likelihood
    /// estimates are biased and carry no variance information.
    pub unscrambled_qmc: bool,
    pub wall_time: Duration,
}

impl RunResult {
    pub fn horizon(&self) -> usize {
        self.log_likelihood.len() - 1
    }

    /// Equality of every estimate, ignoring wall time.
    pub fn same_estimates(&self, other: &RunResult) -> bool {
        self.moments == other.moments && self.log_likelihood == other.log_likelihood
    }
}

/// Source of ancestors and driving uniforms for one sampler.
pub(crate) trait StepSource {
    fn initial_uniforms(&mut self, n: usize, dim: usize) -> Result<Vec<f64>>;

    /// Ancestors of the particles at `t` and their `n x d` driving uniforms.
    fn step(
        &mut self,
        t: usize,
        model: &dyn FeynmanKac,
        system: &ParticleSystem,
    ) -> Result<(Vec<usize>, Vec<f64>)>;
}

pub(crate) fn run_filter(
    model: &dyn FeynmanKac,
    n: usize,
    horizon: usize,
    test_fns: &[TestFn],
    source: &mut dyn StepSource,
) -> Result<(Vec<Vec<f64>>, Vec<f64>, Duration)> {
    if n < 2 {
        return Err(Error::InvalidArgument(
            "at least two particles are required".into(),
        ));
    }
    if let Some(max) = model.max_horizon() {
        if horizon > max {
            return Err(Error::InvalidArgument(format!(
                "horizon {horizon} exceeds model data ({max})"
            )));
        }
    }
    let start = Instant::now();
    let uniforms = source.initial_uniforms(n, model.dim())?;
    let mut system = ParticleSystem::initialize(model, &uniforms)?;
    let mut moments: Vec<Vec<f64>> = test_fns
        .iter()
        .map(|_| Vec::with_capacity(horizon + 1))
        .collect();
    let mut loglik = Vec::with_capacity(horizon + 1);
    let record = |system: &ParticleSystem, moments: &mut Vec<Vec<f64>>, loglik: &mut Vec<f64>| {
        for (m, phi) in moments.iter_mut().zip(test_fns) {
            m.push(system.moment(phi));
        }
        loglik.push(system.log_likelihood());
    };
    record(&system, &mut moments, &mut loglik);
    for t in 1..=horizon {
        let (ancestors, v) = source.step(t, model, &system)?;
        system.advance(model, ancestors, &v)?;
        record(&system, &mut moments, &mut loglik);
    }
    Ok((moments, loglik, start.elapsed()))
}
