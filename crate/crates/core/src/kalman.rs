//! Exact filter for the linear Gaussian model with identity noise and
//! observation matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Filtering distribution `N(mean, cov)` at one time index, plus the
/// accumulated log-likelihood `log p(y_0:t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanState {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub log_lik: f64,
}

/// `X_0 ~ N(0, I)`, `X_t = F X_{t-1} + V_t`, `Y_t = X_t + W_t`.
pub fn kalman_filter(f: &DMatrix<f64>, y: &[Vec<f64>]) -> Result<Vec<KalmanState>> {
    let d = f.nrows();
    if f.ncols() != d {
        return Err(Error::InvalidArgument(
            "transition matrix must be square".into(),
        ));
    }
    let eye = DMatrix::<f64>::identity(d, d);
    let mut mean = DVector::<f64>::zeros(d);
    let mut cov = eye.clone();
    let mut log_lik = 0.0;
    let mut out = Vec::with_capacity(y.len());
    for (t, obs) in y.iter().enumerate() {
        if obs.len() != d {
            return Err(Error::InvalidArgument(format!(
                "observation {t} has length {}, expected {d}",
                obs.len()
            )));
        }
        if obs.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("observation {t} is not finite")));
        }
        if t > 0 {
            mean = f * &mean;
            cov = f * &cov * f.transpose() + &eye;
        }
        let innovation = DVector::from_column_slice(obs) - &mean;
        let s = &cov + &eye;
        let chol = s.clone().cholesky().ok_or_else(|| {
            Error::NonFinite(format!(
                "innovation covariance not positive definite at t = {t}"
            ))
        })?;
        let s_inv_innov = chol.solve(&innovation);
        let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        log_lik += -0.5 * (d as f64 * LN_2PI + log_det + innovation.dot(&s_inv_innov));
        let gain = &cov * chol.inverse();
        mean += &gain * innovation;
        let a = &eye - &gain;
        cov = &a * &cov * a.transpose() + &gain * gain.transpose();
        cov = 0.5 * (&cov + cov.transpose());
        out.push(KalmanState {
            mean: mean.clone(),
            cov: cov.clone(),
            log_lik,
        });
    }
    Ok(out)
}
