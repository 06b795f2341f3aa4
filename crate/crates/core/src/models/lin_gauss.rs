use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fk::FeynmanKac;
use crate::normal::{inv_cdf, ln_density};
use crate::rng::{stream, Purpose};

use super::{Dataset, Formalism};

/// `X_0 ~ N_d(0, I)`, `X_t = F X_{t-1} + V_t`, `Y_t = X_t + W_t`, unit noises,
/// with `F = (alpha^(|i - j| + 1))`, so that `alpha = 0` removes all state memory
/// and `|alpha| < 1/3` keeps the dynamics stable in every dimension.
///
/// The guided form uses the optimal kernel `N_d((y_t + F x) / 2, I / 2)`,
/// whose potential `N_d(y_t; F x, 2 I)` does not depend on the new state.
#[derive(Debug, Clone)]
pub struct LinGaussModel {
    dim: usize,
    alpha: f64,
    f: Vec<f64>,
    formalism: Formalism,
    y: Vec<Vec<f64>>,
}

pub(crate) fn transition_matrix(dim: usize, alpha: f64) -> Vec<f64> {
    let mut f = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            f[i * dim + j] = alpha.powi((i as i32 - j as i32).abs() + 1);
        }
    }
    f
}

impl LinGaussModel {
    pub fn new(dim: usize, alpha: f64, formalism: Formalism, y: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if y.is_empty()
            || y.iter()
                .any(|row| row.len() != dim || row.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::InvalidArgument(format!(
                "observations must be finite rows of length {dim}"
            )));
        }
        Ok(Self {
            dim,
            alpha,
            f: transition_matrix(dim, alpha),
            formalism,
            y,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn observations(&self) -> &[Vec<f64>] {
        &self.y
    }

    pub fn transition(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.f)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.transition()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(0.0f64, |acc, e| acc.max(e.abs()))
    }

    fn apply_f(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.f[i * self.dim..(i + 1) * self.dim]
                .iter()
                .zip(x)
                .map(|(a, b)| a * b)
                .sum();
        }
    }

    fn ln_iso_density(y: &[f64], mean: &[f64], var: f64) -> f64 {
        y.iter()
            .zip(mean)
            .map(|(a, b)| ln_density(*a, *b, var))
            .sum()
    }

    pub fn simulate(dim: usize, alpha: f64, horizon: usize, seed: u64) -> Dataset {
        let f = transition_matrix(dim, alpha);
        let mut rng = stream(seed, Purpose::Simulate, 0);
        let mut x: Vec<f64> = (0..dim).map(|_| inv_cdf(rng.gen())).collect();
        let mut observations = Vec::with_capacity(horizon + 1);
        let mut latent = Vec::with_capacity(horizon + 1);
        for t in 0..=horizon {
            if t > 0 {
                x = (0..dim)
                    .map(|i| {
                        f[i * dim..(i + 1) * dim]
                            .iter()
                            .zip(&x)
                            .map(|(a, b)| a * b)
                            .sum::<f64>()
                            + inv_cdf(rng.gen())
                    })
                    .collect();
            }
            observations.push(x.iter().map(|xi| xi + inv_cdf(rng.gen())).collect());
            latent.push(x.clone());
        }
        Dataset {
            observations,
            latent,
        }
    }
}

impl FeynmanKac for LinGaussModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn max_horizon(&self) -> Option<usize> {
        Some(self.y.len() - 1)
    }

    fn gamma0(&self, u: &[f64], x: &mut [f64]) -> Result<()> {
        match self.formalism {
            Formalism::Bootstrap => x.iter_mut().zip(u).for_each(|(xi, ui)| *xi = inv_cdf(*ui)),
            Formalism::Guided => {
                let sd = std::f64::consts::FRAC_1_SQRT_2;
                for ((xi, ui), yi) in x.iter_mut().zip(u).zip(&self.y[0]) {
                    *xi = 0.5 * yi + sd * inv_cdf(*ui);
                }
            }
        }
        Ok(())
    }

    fn gamma(&self, t: usize, x_prev: &[f64], v: &[f64], x: &mut [f64]) -> Result<()> {
        self.apply_f(x_prev, x);
        match self.formalism {
            Formalism::Bootstrap => x.iter_mut().zip(v).for_each(|(xi, vi)| *xi += inv_cdf(*vi)),
            Formalism::Guided => {
                let sd = std::f64::consts::FRAC_1_SQRT_2;
                for ((xi, vi), yi) in x.iter_mut().zip(v).zip(&self.y[t]) {
                    *xi = 0.5 * (yi + *xi) + sd * inv_cdf(*vi);
                }
            }
        }
        Ok(())
    }

    fn log_g0(&self, x: &[f64]) -> f64 {
        match self.formalism {
            Formalism::Bootstrap => Self::ln_iso_density(&self.y[0], x, 1.0),
            Formalism::Guided => Self::ln_iso_density(&self.y[0], &vec![0.0; self.dim], 2.0),
        }
    }

    fn log_g(&self, t: usize, x_prev: &[f64], x: &[f64]) -> f64 {
        match self.formalism {
            Formalism::Bootstrap => Self::ln_iso_density(&self.y[t], x, 1.0),
            Formalism::Guided => {
                let mut fx = [0.0; 64];
                let fx = if self.dim <= 64 {
                    &mut fx[..self.dim]
                } else {
                    return self.log_g_heap(t, x_prev);
                };
                self.apply_f(x_prev, fx);
                Self::ln_iso_density(&self.y[t], fx, 2.0)
            }
        }
    }
}

impl LinGaussModel {
    fn log_g_heap(&self, t: usize, x_prev: &[f64]) -> f64 {
        let mut fx = vec![0.0; self.dim];
        self.apply_f(x_prev, &mut fx);
        Self::ln_iso_density(&self.y[t], &fx, 2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bootstrap_without_memory_ignores_previous_state() {
        let m =
            LinGaussModel::new(1, 0.0, Formalism::Bootstrap, vec![vec![0.0], vec![1.0]]).unwrap();
        let mut a = [0.0];
        let mut b = [0.0];
        m.gamma(1, &[5.0], &[0.3], &mut a).unwrap();
        m.gamma(1, &[-2.0], &[0.3], &mut b).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0], inv_cdf(0.3));
    }

    #[test]
    fn guided_potential_is_free_of_new_state() {
        let y = vec![vec![0.1, 0.2, 0.3]; 3];
        let m = LinGaussModel::new(3, 0.4, Formalism::Guided, y).unwrap();
        let xp = [0.5, -1.0, 2.0];
        let g1 = m.log_g(2, &xp, &[0.0, 0.0, 0.0]);
        let g2 = m.log_g(2, &xp, &[10.0, -3.0, 1.0]);
        assert_eq!(g1, g2);
    }

    #[test]
    fn transition_is_symmetric_and_stable() {
        let y = vec![vec![0.0; 5]];
        for &alpha in &[0.0, 0.4, -0.3] {
            let m = LinGaussModel::new(5, alpha, Formalism::Bootstrap, y.clone()).unwrap();
            let f = m.transition();
            assert_eq!(f, f.transpose());
            // Gershgorin: every row sum of |F| is below |alpha| (1 + |alpha|) / (1 - |alpha|).
            let a = alpha.abs();
            assert!(m.spectral_radius() < a * (1.0 + a) / (1.0 - a) + 1e-12);
        }
        let m = LinGaussModel::new(5, 0.4, Formalism::Bootstrap, y).unwrap();
        assert!(m.spectral_radius() < 1.0);
    }

    #[test]
    fn guided_and_bootstrap_define_the_same_joint() {
        // p(x | x_prev) f(y | x) = m(x | x_prev) G(x_prev, x) pointwise.
        let y = vec![vec![0.4, -0.2]; 2];
        let boot = LinGaussModel::new(2, 0.4, Formalism::Bootstrap, y.clone()).unwrap();
        let guided = LinGaussModel::new(2, 0.4, Formalism::Guided, y).unwrap();
        let xp = [0.3, -0.7];
        let x = [1.1, 0.2];
        let mut fx = [0.0; 2];
        boot.apply_f(&xp, &mut fx);
        let lhs = LinGaussModel::ln_iso_density(&x, &fx, 1.0) + boot.log_g(1, &xp, &x);
        let mean: Vec<f64> = fx
            .iter()
            .zip([0.4, -0.2])
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let rhs = LinGaussModel::ln_iso_density(&x, &mean, 0.5) + guided.log_g(1, &xp, &x);
        assert!((lhs - rhs).abs() < 1e-12);
    }
}
