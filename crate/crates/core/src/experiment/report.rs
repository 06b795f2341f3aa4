use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Quantity};
use super::{Failure, RunRecord};
use crate::error::{Error, Result};

/// One row of the report file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub model: String,
    pub engine: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub t: usize,
    /// Mean squared error against the oracle, or against the pooled mean
    /// over engines at the same `(N, t)` when there is no oracle.
    pub mse: f64,
    /// Sample variance across replications.
    pub variance: f64,
    /// `mse` of the reference engine divided by this row's `mse`.
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainTable {
    pub rows: Vec<ReportRow>,
}

impl GainTable {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let rows = r
            .deserialize()
            .map(|rec| rec.map_err(Error::from))
            .collect::<Result<_>>()?;
        Ok(Self { rows })
    }

    /// Gains of one engine at one particle count, ordered by `t`.
    pub fn gains(&self, engine: &str, n: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.engine == engine && r.n == n)
            .map(|r| r.gain)
            .collect()
    }
}

/// First quartile, median and third quartile of the finite values
/// (linear interpolation between order statistics).
pub fn quantiles(values: &[f64]) -> Option<[f64; 3]> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let h = p * (v.len() - 1) as f64;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        v[lo] + (h - lo as f64) * (v[hi] - v[lo])
    };
    Some([q(0.25), q(0.5), q(0.75)])
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Builds the per-`(engine, N, t)` table. `truth` holds the oracle values
/// of the chosen quantity, indexed by `t`.
pub fn gain_table(
    cfg: &ExperimentConfig,
    records: &[RunRecord],
    truth: Option<&[f64]>,
) -> Result<GainTable> {
    let quantity = cfg.quantity();
    let reference = cfg.reference().label();
    let value = |r: &RunRecord| match quantity {
        Quantity::MeanX1 => r.estimate_mean_x1,
        Quantity::LogLikelihood => r.log_likelihood,
    };
    // Sum in replication order so the table does not depend on record order.
    let mut keyed: BTreeMap<(usize, usize, String), Vec<(usize, f64)>> = BTreeMap::new();
    for r in records {
        keyed
            .entry((r.n, r.t, r.engine.clone()))
            .or_default()
            .push((r.replication, value(r)));
    }
    let groups: BTreeMap<(usize, usize, String), Vec<f64>> = keyed
        .into_iter()
        .map(|(k, mut v)| {
            v.sort_by_key(|p| p.0);
            (k, v.into_iter().map(|p| p.1).collect())
        })
        .collect();
    let mut pooled: BTreeMap<(usize, usize), (f64, usize)> = BTreeMap::new();
    for ((n, t, _), xs) in &groups {
        let e = pooled.entry((*n, *t)).or_default();
        e.0 += xs.iter().sum::<f64>();
        e.1 += xs.len();
    }
    let centre = |n: usize, t: usize| -> Result<f64> {
        match truth {
            Some(tr) => tr
                .get(t)
                .copied()
                .ok_or_else(|| Error::Config(format!("oracle has no value at t = {t}"))),
            None => {
                let (s, c) = pooled[&(n, t)];
                Ok(s / c as f64)
            }
        }
    };
    let mut mse = BTreeMap::new();
    for ((n, t, engine), xs) in &groups {
        let c = centre(*n, *t)?;
        let m = mean(&xs.iter().map(|x| (x - c) * (x - c)).collect::<Vec<_>>());
        mse.insert((*n, *t, engine.clone()), (m, sample_variance(xs)));
    }
    let mut rows = Vec::with_capacity(mse.len());
    for engine in cfg.run.engines.iter().map(|e| e.label()) {
        for &n in &cfg.run.particles {
            for t in 0..=cfg.horizon {
                let Some(&(m, var)) = mse.get(&(n, t, engine.clone())) else {
                    continue;
                };
                let gain = if engine == reference {
                    1.0
                } else {
                    match mse.get(&(n, t, reference.clone())) {
                        Some(&(m_ref, _)) => m_ref / m,
                        None => f64::NAN,
                    }
                };
                rows.push(ReportRow {
                    model: cfg.model.id().to_string(),
                    engine: engine.clone(),
                    n,
                    t,
                    mse: m,
                    variance: var,
                    gain,
                });
            }
        }
    }
    Ok(GainTable { rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainSummary {
    pub engine: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub gain_q25: Option<f64>,
    pub gain_median: Option<f64>,
    pub gain_q75: Option<f64>,
    /// Time indices at which every replication gave the same value.
    pub degenerate_t: Vec<usize>,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub model: String,
    pub quantity: String,
    /// `mse_vs_oracle` or `variance_about_pooled_mean`.
    pub metric: String,
    pub reference: String,
    pub horizon: usize,
    pub replications: usize,
    pub seed: u64,
    pub gains: Vec<GainSummary>,
    pub failures: Vec<Failure>,
    pub wall_seconds: f64,
}

impl Summary {
    pub fn new(
        cfg: &ExperimentConfig,
        table: &GainTable,
        has_oracle: bool,
        failures: Vec<Failure>,
        wall_seconds: f64,
    ) -> Self {
        let mut gains = Vec::new();
        for engine in cfg.run.engines.iter().map(|e| e.label()) {
            for &n in &cfg.run.particles {
                let rows: Vec<&ReportRow> = table
                    .rows
                    .iter()
                    .filter(|r| r.engine == engine && r.n == n)
                    .collect();
                let q = quantiles(&rows.iter().map(|r| r.gain).collect::<Vec<_>>());
                gains.push(GainSummary {
                    engine: engine.clone(),
                    n,
                    gain_q25: q.map(|q| q[0]),
                    gain_median: q.map(|q| q[1]),
                    gain_q75: q.map(|q| q[2]),
                    degenerate_t: rows
                        .iter()
                        .filter(|r| r.variance == 0.0)
                        .map(|r| r.t)
                        .collect(),
                });
            }
        }
        Self {
            model: cfg.model.id().to_string(),
            quantity: cfg.quantity().as_str().to_string(),
            metric: if has_oracle {
                "mse_vs_oracle"
            } else {
                "variance_about_pooled_mean"
            }
            .to_string(),
            reference: cfg.reference().label(),
            horizon: cfg.horizon,
            replications: cfg.run.replications,
            seed: cfg.seed,
            gains,
            failures,
            wall_seconds,
        }
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}
