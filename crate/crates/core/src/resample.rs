//! Inverse-transform resampling.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};

/// Normalised, nonnegative weights with at least one positive entry.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// Normalise nonnegative raw weights.
    pub fn normalized(raw: Vec<f64>) -> Result<Self> {
        if raw.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = raw.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidArgument("all weights are zero".into()));
        }
        Ok(Self(raw.into_iter().map(|w| w / total).collect()))
    }

    pub(crate) fn from_normalized_unchecked(w: Vec<f64>) -> Self {
        Self(w)
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Labels `a_n = min { m : w_1 + .. + w_m > u_n }` (0-based) for sorted `u`,
/// together with the number of cursor advances (never more than `w.len()`).
pub fn inverse_cdf_ancestors_counted(
    u_sorted: &[f64],
    w: &WeightVector,
) -> Result<(Vec<usize>, usize)> {
    let w = w.as_slice();
    let n_weights = w.len();
    let last_positive = w
        .iter()
        .rposition(|&x| x > 0.0)
        .ok_or_else(|| Error::InvalidArgument("all weights are zero".into()))?;
    let below_one = 1.0 - f64::EPSILON / 2.0;
    let mut labels = Vec::with_capacity(u_sorted.len());
    let mut cumsum = 0.0;
    let mut m = 0usize;
    let mut advances = 0usize;
    let mut prev = f64::NEG_INFINITY;
    for (pos, &u) in u_sorted.iter().enumerate() {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::InvalidArgument(format!(
                "uniform {u} outside [0, 1]"
            )));
        }
        if u < prev {
            return Err(Error::Unsorted { position: pos });
        }
        prev = u;
        let u = u.min(below_one);
        while cumsum <= u && m < n_weights {
            cumsum += w[m];
            m += 1;
            advances += 1;
        }
        // Rounding can leave the running sum just below u near 1.
        labels.push(if cumsum > u { m - 1 } else { last_positive });
    }
    Ok((labels, advances))
}

pub fn inverse_cdf_ancestors(u_sorted: &[f64], w: &WeightVector) -> Result<Vec<usize>> {
    inverse_cdf_ancestors_counted(u_sorted, w).map(|(labels, _)| labels)
}

/// Multinomial resampling: sorted IID uniforms pushed through the inverse CDF.
pub fn multinomial_ancestors(w: &WeightVector, n_draws: usize, seed: u64) -> Result<Vec<usize>> {
    if n_draws == 0 {
        return Err(Error::InvalidArgument("n_draws must be at least 1".into()));
    }
    let mut rng = stream(seed, Purpose::Resample, 0);
    let mut u: Vec<f64> = (0..n_draws).map(|_| rng.gen::<f64>()).collect();
    u.sort_by(f64::total_cmp);
    inverse_cdf_ancestors(&u, w)
}

/// Inverse-CDF selection over particles visited in the order `order`:
/// weights are permuted by `order`, the inverse CDF is applied, and the
/// resulting ranks are mapped back through `order`.
pub fn sorted_ancestors_by_state(
    u_sorted: &[f64],
    w: &WeightVector,
    order: &[usize],
) -> Result<Vec<usize>> {
    if order.len() != w.len() {
        return Err(Error::InvalidArgument(
            "permutation and weights have different lengths".into(),
        ));
    }
    let permuted = WeightVector(order.iter().map(|&i| w.as_slice()[i]).collect());
    let ranks = inverse_cdf_ancestors(u_sorted, &permuted)?;
    Ok(ranks.into_iter().map(|r| order[r]).collect())
}
