use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::brownian::{Construction, PathSpec};
use crate::error::{Error, Result};
use crate::fk::FeynmanKac;
use crate::normal::{inv_cdf, ln_density};
use crate::rng::{stream, Purpose};

use super::Dataset;

/// Parameters of the diffusion-driven stochastic volatility model
///
/// `dX = mu_X(X) dt + sigma_X(X) dW^X`, `dY = (mu^Y + beta e^X) dt + e^{X/2} dW^Y`,
/// `corr(W^X, W^Y) = rho`, with `mu_X(x) = kappa (mu^X - e^x) e^{-x} - omega^2 e^{-x} / 2`
/// and `sigma_X(x) = omega e^{-x/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiffusionParams {
    pub kappa: f64,
    pub mu_x: f64,
    pub omega: f64,
    pub mu_y: f64,
    pub beta: f64,
    pub rho: f64,
}

impl Default for DiffusionParams {
    fn default() -> Self {
        Self {
            kappa: 0.02,
            mu_x: 0.8,
            omega: 0.1,
            mu_y: 0.0,
            beta: 0.0,
            rho: -0.4,
        }
    }
}

impl DiffusionParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.kappa, self.mu_x, self.omega, self.mu_y, self.beta, self.rho,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(
                "diffusion parameters must be finite".into(),
            ));
        }
        if self.kappa < 0.0 || self.omega < 0.0 {
            return Err(Error::InvalidArgument(
                "kappa and omega must be nonnegative".into(),
            ));
        }
        if !(self.rho.abs() < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "rho = {} gives a degenerate observation variance",
                self.rho
            )));
        }
        Ok(())
    }

    pub fn drift(&self, x: f64) -> f64 {
        let e = (-x).exp();
        self.kappa * (self.mu_x - x.exp()) * e - 0.5 * self.omega * self.omega * e
    }

    pub fn volatility(&self, x: f64) -> f64 {
        self.omega * (-0.5 * x).exp()
    }

    /// Variance of the initial law `N(mu^X, omega^2 / (2 kappa))`.
    pub fn initial_variance(&self) -> f64 {
        if self.omega == 0.0 {
            0.0
        } else {
            self.omega * self.omega / (2.0 * self.kappa)
        }
    }
}

/// Euler recursion over one unit interval split into `increments.len()` steps,
/// starting from `x_prev_last`.
pub fn euler_propagate(
    params: &DiffusionParams,
    x_prev_last: f64,
    increments: &[f64],
    out: &mut [f64],
) -> Result<()> {
    let delta = 1.0 / increments.len() as f64;
    let mut x = x_prev_last;
    for (m, (o, dw)) in out.iter_mut().zip(increments).enumerate() {
        x = x + delta * params.drift(x) + params.volatility(x) * dw;
        if !x.is_finite() {
            return Err(Error::NonFinite(format!(
                "euler step {} overflowed from x_prev = {x_prev_last} (increment {dw})",
                m + 1
            )));
        }
        *o = x;
    }
    Ok(())
}

/// Inverts the Euler recursion: the Brownian increments that map `x_prev_last` to `x`.
pub fn recover_increments(params: &DiffusionParams, x_prev_last: f64, x: &[f64], out: &mut [f64]) {
    let delta = 1.0 / x.len() as f64;
    let mut prev = x_prev_last;
    for (o, &xm) in out.iter_mut().zip(x) {
        *o = (xm - prev - delta * params.drift(prev)) / params.volatility(prev);
        prev = xm;
    }
}

/// Log-density of the observation increment `y - y_prev` given the latent
/// path `x` over the interval and its driving increments.
pub fn diffusion_log_g(
    params: &DiffusionParams,
    x: &[f64],
    increments: &[f64],
    y_prev: f64,
    y: f64,
) -> f64 {
    let m = x.len() as f64;
    let mut sigma2 = 0.0;
    let mut z = 0.0;
    for (&xm, &dw) in x.iter().zip(increments) {
        sigma2 += xm.exp();
        z += (0.5 * xm).exp() * dw;
    }
    sigma2 /= m;
    let rho = params.rho;
    let mean = y_prev + params.mu_y + params.beta * sigma2 + rho * z;
    ln_density(y, mean, (1.0 - rho * rho) * sigma2)
}

/// The diffusion SV model as a Feynman-Kac model whose state at time `t` is
/// the Euler path `X_{t-1+m/M}`, `m = 1..=M`.
///
/// Everything depends on the previous state only through its last
/// coordinate, which is what [`FeynmanKac::lambda`] exposes.
#[derive(Debug, Clone)]
pub struct DiffusionSvModel {
    params: DiffusionParams,
    path: PathSpec,
    y: Vec<f64>,
}

impl DiffusionSvModel {
    pub fn new(
        params: DiffusionParams,
        steps: usize,
        construction: Construction,
        y: Vec<f64>,
    ) -> Result<Self> {
        params.validate()?;
        if params.kappa == 0.0 || params.omega == 0.0 {
            return Err(Error::InvalidArgument(
                "filtering needs kappa > 0 and omega > 0".into(),
            ));
        }
        if y.is_empty() || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(
                "observations must be finite and nonempty".into(),
            ));
        }
        Ok(Self {
            params,
            path: PathSpec::new(steps, construction)?,
            y,
        })
    }

    pub fn params(&self) -> &DiffusionParams {
        &self.params
    }

    pub fn steps(&self) -> usize {
        self.path.steps()
    }

    pub fn construction(&self) -> Construction {
        self.path.construction()
    }

    /// Simulates `T` unit intervals on a grid of `fine_steps` Euler steps per
    /// interval and records `Y` and `X` at integer times, with `Y_0 = 0`.
    pub fn simulate(
        params: &DiffusionParams,
        horizon: usize,
        fine_steps: usize,
        seed: u64,
    ) -> Result<Dataset> {
        params.validate()?;
        if fine_steps == 0 {
            return Err(Error::InvalidArgument(
                "fine grid needs at least one step".into(),
            ));
        }
        let mut rng = stream(seed, Purpose::Simulate, 0);
        let delta = 1.0 / fine_steps as f64;
        let sd = delta.sqrt();
        let rho_bar = (1.0 - params.rho * params.rho).sqrt();
        let mut x = params.mu_x + params.initial_variance().sqrt() * inv_cdf(rng.gen());
        let mut y = 0.0;
        let mut observations = vec![vec![0.0]];
        let mut latent = vec![vec![x]];
        for _ in 0..horizon {
            for _ in 0..fine_steps {
                let dwx = sd * inv_cdf(rng.gen());
                let dwb = sd * inv_cdf(rng.gen());
                x += delta * params.drift(x) + params.volatility(x) * dwx;
                if !x.is_finite() {
                    return Err(Error::NonFinite(
                        "simulated log-volatility overflowed".into(),
                    ));
                }
                let vol = x.exp();
                y += (params.mu_y + params.beta * vol) * delta
                    + vol.sqrt() * (params.rho * dwx + rho_bar * dwb);
            }
            observations.push(vec![y]);
            latent.push(vec![x]);
        }
        Ok(Dataset {
            observations,
            latent,
        })
    }
}

impl FeynmanKac for DiffusionSvModel {
    fn dim(&self) -> usize {
        self.path.steps()
    }

    fn max_horizon(&self) -> Option<usize> {
        Some(self.y.len() - 1)
    }

    fn gamma0(&self, u: &[f64], x: &mut [f64]) -> Result<()> {
        let x0 = self.params.mu_x + self.params.initial_variance().sqrt() * inv_cdf(u[0]);
        x.fill(x0);
        Ok(())
    }

    fn gamma(&self, _t: usize, x_prev: &[f64], v: &[f64], x: &mut [f64]) -> Result<()> {
        let m = self.path.steps();
        let mut buf = [0.0; 64];
        let mut heap;
        let dw: &mut [f64] = if m <= 64 {
            &mut buf[..m]
        } else {
            heap = vec![0.0; m];
            &mut heap
        };
        self.path.increments(v, dw);
        euler_propagate(&self.params, x_prev[m - 1], dw, x)
    }

    fn log_g0(&self, _x: &[f64]) -> f64 {
        0.0
    }

    fn log_g(&self, t: usize, x_prev: &[f64], x: &[f64]) -> f64 {
        let m = x.len();
        let mut buf = [0.0; 64];
        let mut heap;
        let dw: &mut [f64] = if m <= 64 {
            &mut buf[..m]
        } else {
            heap = vec![0.0; m];
            &mut heap
        };
        recover_increments(&self.params, x_prev[m - 1], x, dw);
        diffusion_log_g(&self.params, x, dw, self.y[t - 1], self.y[t])
    }

    fn lambda_dim(&self) -> Option<usize> {
        Some(1)
    }

    fn lambda(&self, x: &[f64], out: &mut [f64]) {
        out[0] = x[x.len() - 1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_path_without_drift_or_noise() {
        let p = DiffusionParams {
            kappa: 0.0,
            omega: 0.0,
            ..Default::default()
        };
        let mut out = [0.0; 6];
        euler_propagate(&p, 0.37, &[0.0; 6], &mut out).unwrap();
        assert!(out.iter().all(|&x| x == 0.37));
    }

    #[test]
    fn single_step_is_direct_substitution() {
        let p = DiffusionParams::default();
        let (x, dw) = (0.3f64, 0.25);
        let mut out = [0.0];
        euler_propagate(&p, x, &[dw], &mut out).unwrap();
        let drift =
            p.kappa * (p.mu_x - x.exp()) * (-x).exp() - 0.5 * p.omega * p.omega * (-x).exp();
        let expected = x + drift + p.omega * (-x / 2.0).exp() * dw;
        assert!((out[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn recovery_inverts_propagation() {
        let p = DiffusionParams::default();
        let dw = [0.1, -0.4, 0.05, 0.3, -0.2];
        let mut x = [0.0; 5];
        euler_propagate(&p, -0.6, &dw, &mut x).unwrap();
        let mut back = [0.0; 5];
        recover_increments(&p, -0.6, &x, &mut back);
        for (a, b) in dw.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_volatility_reduces_to_standard_normal() {
        let p = DiffusionParams {
            rho: 0.0,
            ..Default::default()
        };
        let v = diffusion_log_g(&p, &[0.0; 4], &[0.1; 4], 0.5, 1.2);
        assert!((v - ln_density(1.2, 0.5, 1.0)).abs() < 1e-14);
    }

    #[test]
    fn overflow_is_reported() {
        let p = DiffusionParams {
            kappa: 1.0,
            omega: 1.0,
            ..Default::default()
        };
        let mut out = [0.0; 2];
        assert!(euler_propagate(&p, -800.0, &[0.0, 0.0], &mut out).is_err());
    }

    #[test]
    fn degenerate_correlation_rejected() {
        let p = DiffusionParams {
            rho: 1.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        assert!(DiffusionSvModel::new(p, 4, Construction::Bridge, vec![0.0, 1.0]).is_err());
    }
}
