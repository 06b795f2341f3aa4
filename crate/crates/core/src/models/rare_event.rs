use crate::error::Result;
use crate::fk::FeynmanKac;
use crate::normal::{cdf, inv_cdf, ln_cdf, ln_pdf};

use super::Formalism;

/// Gaussian AR(1) `X_t = phi X_{t-1} + V_t`, `X_0 ~ N(0, 1)`, conditioned on
/// staying nonnegative. `L_t` is the probability that `X_s >= 0` for all
/// `s <= t`; for `phi = 0` it equals `2^-(t+1)`.
///
/// The bootstrap form simulates the AR(1) blindly and kills negative
/// particles; the guided form draws from the normal truncated to `[0, inf)`
/// and weights by `Phi(phi x_{t-1})`.
#[derive(Debug, Clone)]
pub struct RareEventModel {
    phi: f64,
    formalism: Formalism,
}

impl RareEventModel {
    pub fn new(phi: f64, formalism: Formalism) -> Self {
        Self { phi, formalism }
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Draw from `N(mean, 1)` truncated to `[0, inf)` by inverse CDF.
    fn truncated(mean: f64, u: f64) -> f64 {
        // P(Z > z) = (1 - u) Phi(mean) puts z in [-mean, inf).
        (mean - inv_cdf((1.0 - u) * cdf(mean))).max(0.0)
    }

    /// Guided proposal log-density `log m_t(x | x_prev)`.
    pub fn proposal_log_density(&self, x_prev: f64, x: f64) -> f64 {
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        let mean = self.phi * x_prev;
        ln_pdf(x - mean) - ln_cdf(mean)
    }
}

fn indicator(x: f64) -> f64 {
    if x >= 0.0 {
        0.0
    } else {
        f64::NEG_INFINITY
    }
}

impl FeynmanKac for RareEventModel {
    fn dim(&self) -> usize {
        1
    }

    fn gamma0(&self, u: &[f64], x: &mut [f64]) -> Result<()> {
        x[0] = match self.formalism {
            Formalism::Bootstrap => inv_cdf(u[0]),
            Formalism::Guided => Self::truncated(0.0, u[0]),
        };
        Ok(())
    }

    fn gamma(&self, _t: usize, x_prev: &[f64], v: &[f64], x: &mut [f64]) -> Result<()> {
        let mean = self.phi * x_prev[0];
        x[0] = match self.formalism {
            Formalism::Bootstrap => mean + inv_cdf(v[0]),
            Formalism::Guided => Self::truncated(mean, v[0]),
        };
        Ok(())
    }

    fn log_g0(&self, x: &[f64]) -> f64 {
        match self.formalism {
            Formalism::Bootstrap => indicator(x[0]),
            Formalism::Guided => ln_cdf(0.0),
        }
    }

    fn log_g(&self, _t: usize, x_prev: &[f64], x: &[f64]) -> f64 {
        match self.formalism {
            Formalism::Bootstrap => indicator(x[0]),
            Formalism::Guided => ln_cdf(self.phi * x_prev[0]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guided_draws_are_nonnegative_and_monotone() {
        let m = RareEventModel::new(0.7, Formalism::Guided);
        let mut prev = -1.0;
        for i in 0..=1000 {
            let mut x = [0.0];
            m.gamma(1, &[-2.0], &[i as f64 / 1000.0], &mut x).unwrap();
            assert!(x[0] >= 0.0 && x[0] >= prev);
            prev = x[0];
        }
    }

    #[test]
    fn guided_draw_matches_truncated_cdf() {
        // P(X <= x) = (Phi(x - mean) - Phi(-mean)) / Phi(mean) at the drawn point equals u.
        let m = RareEventModel::new(0.5, Formalism::Guided);
        for &(xp, u) in &[(1.0, 0.3), (-3.0, 0.9), (4.0, 0.01)] {
            let mut x = [0.0];
            m.gamma(1, &[xp], &[u], &mut x).unwrap();
            let mean = 0.5 * xp;
            let p = (cdf(x[0] - mean) - cdf(-mean)) / cdf(mean);
            assert!((p - u).abs() < 1e-9, "{xp} {u}: {p}");
        }
    }

    #[test]
    fn truncated_proposal_integrates_to_one() {
        let m = RareEventModel::new(0.9, Formalism::Guided);
        for &xp in &[-2.0, 0.0, 1.5] {
            // Composite Simpson on [0, 20].
            let (a, b, n) = (0.0, 20.0, 20_000);
            let h = (b - a) / n as f64;
            let f = |x: f64| m.proposal_log_density(xp, x).exp();
            let mut s = f(a) + f(b);
            for i in 1..n {
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
            }
            assert!((s * h / 3.0 - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn bootstrap_potential_is_indicator() {
        let m = RareEventModel::new(0.0, Formalism::Bootstrap);
        assert_eq!(m.log_g(1, &[0.0], &[0.1]), 0.0);
        assert_eq!(m.log_g(1, &[0.0], &[-0.1]), f64::NEG_INFINITY);
    }
}
