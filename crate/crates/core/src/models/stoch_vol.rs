use rand::Rng;

use crate::error::{Error, Result};
use crate::fk::FeynmanKac;
use crate::normal::{inv_cdf, ln_density};
use crate::rng::{stream, Purpose};

use super::{Dataset, Formalism};

/// Basic stochastic volatility model:
/// `X_t - mu = phi (X_{t-1} - mu) + sigma V_t`, `Y_t | X_t ~ N(0, e^{X_t})`,
/// with the stationary initial law `N(mu, sigma^2 / (1 - phi^2))`.
///
/// The guided form linearises `exp(-x)` around the prior mean
/// `m = mu + phi (x_{t-1} - mu)`, which gives the Gaussian proposal
/// `N(m + sigma^2 / 2 (y^2 e^{-m} - 1), sigma^2)`.
#[derive(Debug, Clone)]
pub struct StochVolModel {
    mu: f64,
    phi: f64,
    sigma: f64,
    formalism: Formalism,
    y: Vec<f64>,
}

impl StochVolModel {
    pub fn new(mu: f64, phi: f64, sigma: f64, formalism: Formalism, y: Vec<f64>) -> Result<Self> {
        if !(sigma > 0.0) || !(phi.abs() < 1.0) {
            return Err(Error::InvalidArgument(
                "stochastic volatility needs sigma > 0 and |phi| < 1".into(),
            ));
        }
        if y.is_empty() || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(
                "observations must be finite and nonempty".into(),
            ));
        }
        Ok(Self {
            mu,
            phi,
            sigma,
            formalism,
            y,
        })
    }

    fn stationary_sd(&self) -> f64 {
        self.sigma / (1.0 - self.phi * self.phi).sqrt()
    }

    fn prior_mean(&self, x_prev: f64) -> f64 {
        self.mu + self.phi * (x_prev - self.mu)
    }

    fn proposal_mean(&self, t: usize, x_prev: f64) -> f64 {
        let m = self.prior_mean(x_prev);
        let y = self.y[t];
        m + 0.5 * self.sigma * self.sigma * (y * y * (-m).exp() - 1.0)
    }

    /// Guided proposal log-density `log m_t(x | x_prev)`.
    pub fn proposal_log_density(&self, t: usize, x_prev: f64, x: f64) -> f64 {
        ln_density(x, self.proposal_mean(t, x_prev), self.sigma * self.sigma)
    }

    fn log_obs(&self, t: usize, x: f64) -> f64 {
        ln_density(self.y[t], 0.0, x.exp())
    }

    pub fn simulate(mu: f64, phi: f64, sigma: f64, horizon: usize, seed: u64) -> Dataset {
        let mut rng = stream(seed, Purpose::Simulate, 0);
        let mut x = mu + sigma / (1.0 - phi * phi).sqrt() * inv_cdf(rng.gen());
        let mut observations = Vec::with_capacity(horizon + 1);
        let mut latent = Vec::with_capacity(horizon + 1);
        for t in 0..=horizon {
            if t > 0 {
                x = mu + phi * (x - mu) + sigma * inv_cdf(rng.gen());
            }
            latent.push(vec![x]);
            observations.push(vec![(0.5 * x).exp() * inv_cdf(rng.gen())]);
        }
        Dataset {
            observations,
            latent,
        }
    }
}

impl FeynmanKac for StochVolModel {
    fn dim(&self) -> usize {
        1
    }

    fn max_horizon(&self) -> Option<usize> {
        Some(self.y.len() - 1)
    }

    fn gamma0(&self, u: &[f64], x: &mut [f64]) -> Result<()> {
        x[0] = self.mu + self.stationary_sd() * inv_cdf(u[0]);
        Ok(())
    }

    fn gamma(&self, t: usize, x_prev: &[f64], v: &[f64], x: &mut [f64]) -> Result<()> {
        let mean = match self.formalism {
            Formalism::Bootstrap => self.prior_mean(x_prev[0]),
            Formalism::Guided => self.proposal_mean(t, x_prev[0]),
        };
        x[0] = mean + self.sigma * inv_cdf(v[0]);
        Ok(())
    }

    fn log_g0(&self, x: &[f64]) -> f64 {
        self.log_obs(0, x[0])
    }

    fn log_g(&self, t: usize, x_prev: &[f64], x: &[f64]) -> f64 {
        match self.formalism {
            Formalism::Bootstrap => self.log_obs(t, x[0]),
            Formalism::Guided => {
                let var = self.sigma * self.sigma;
                ln_density(x[0], self.prior_mean(x_prev[0]), var) + self.log_obs(t, x[0])
                    - self.proposal_log_density(t, x_prev[0], x[0])
            }
        }
    }
}
