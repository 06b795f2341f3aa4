use nalgebra::{DMatrix, DVector};
use sqmc_core::kalman::kalman_filter;
use sqmc_core::models::{Formalism, LinGaussModel};
use sqmc_core::normal::ln_density;

fn transition(d: usize, alpha: f64) -> DMatrix<f64> {
    LinGaussModel::new(d, alpha, Formalism::Bootstrap, vec![vec![0.0; d]])
        .unwrap()
        .transition()
}

#[test]
fn agrees_with_grid_bayes_in_two_dimensions() {
    let (d, alpha, horizon) = (2, 0.4, 3);
    let data = LinGaussModel::simulate(d, alpha, horizon, 17);
    let f = transition(d, alpha);
    let states = kalman_filter(&f, &data.observations).unwrap();

    let g = 81;
    let h = 12.0 / (g - 1) as f64;
    let nodes: Vec<[f64; 2]> = (0..g * g)
        .map(|k| [-6.0 + (k / g) as f64 * h, -6.0 + (k % g) as f64 * h])
        .collect();
    let prior: Vec<f64> = nodes
        .iter()
        .map(|x| (ln_density(x[0], 0.0, 1.0) + ln_density(x[1], 0.0, 1.0)).exp())
        .collect();
    let mut p = prior;
    for (t, y) in data.observations.iter().enumerate() {
        if t > 0 {
            let fx: Vec<[f64; 2]> = nodes
                .iter()
                .map(|x| {
                    [
                        f[(0, 0)] * x[0] + f[(0, 1)] * x[1],
                        f[(1, 0)] * x[0] + f[(1, 1)] * x[1],
                    ]
                })
                .collect();
            p = nodes
                .iter()
                .map(|x| {
                    p.iter()
                        .zip(&fx)
                        .map(|(w, m)| {
                            w * (ln_density(x[0], m[0], 1.0) + ln_density(x[1], m[1], 1.0)).exp()
                        })
                        .sum::<f64>()
                })
                .collect();
        }
        for (w, x) in p.iter_mut().zip(&nodes) {
            *w *= (ln_density(y[0], x[0], 1.0) + ln_density(y[1], x[1], 1.0)).exp();
        }
        let z: f64 = p.iter().sum();
        p.iter_mut().for_each(|w| *w /= z);
        let mean = [0, 1].map(|i| p.iter().zip(&nodes).map(|(w, x)| w * x[i]).sum::<f64>());
        let var0 = p
            .iter()
            .zip(&nodes)
            .map(|(w, x)| w * (x[0] - mean[0]).powi(2))
            .sum::<f64>();
        for i in 0..2 {
            assert!(
                (mean[i] - states[t].mean[i]).abs() < 1e-2,
                "t={t}: grid {mean:?} vs {}",
                states[t].mean
            );
        }
        assert!((var0 - states[t].cov[(0, 0)]).abs() < 1e-2);
    }
}

fn joint_log_density(f: &DMatrix<f64>, y: &[Vec<f64>]) -> f64 {
    let d = f.nrows();
    let n = y.len();
    let eye = DMatrix::<f64>::identity(d, d);
    let mut p = vec![eye.clone()];
    for t in 1..n {
        p.push(f * &p[t - 1] * f.transpose() + &eye);
    }
    let mut cov = DMatrix::<f64>::zeros(n * d, n * d);
    for s in 0..n {
        for t in s..n {
            let mut block = p[s].clone();
            for _ in s..t {
                block = f * block;
            }
            if s == t {
                block += &eye;
            }
            cov.view_mut((t * d, s * d), (d, d)).copy_from(&block);
            cov.view_mut((s * d, t * d), (d, d))
                .copy_from(&block.transpose());
        }
    }
    let stacked = DVector::from_iterator(n * d, y.iter().flatten().copied());
    let chol = cov.cholesky().unwrap();
    let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    -0.5 * ((n * d) as f64 * (2.0 * std::f64::consts::PI).ln()
        + log_det
        + stacked.dot(&chol.solve(&stacked)))
}

#[test]
fn likelihood_matches_joint_gaussian() {
    for d in 1..=3 {
        for horizon in 0..=4 {
            let data = LinGaussModel::simulate(d, 0.4, horizon, (10 * d + horizon) as u64);
            let f = transition(d, 0.4);
            let states = kalman_filter(&f, &data.observations).unwrap();
            let direct = joint_log_density(&f, &data.observations);
            assert!(
                (states[horizon].log_lik - direct).abs() < 1e-8,
                "d={d}, T={horizon}"
            );
        }
    }
}

#[test]
fn covariance_stays_symmetric_positive_definite() {
    let data = LinGaussModel::simulate(5, 0.4, 300, 2);
    let states = kalman_filter(&transition(5, 0.4), &data.observations).unwrap();
    for s in &states {
        assert!((&s.cov - s.cov.transpose()).amax() < 1e-12);
        assert!(s
            .cov
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .all(|&e| e > 0.0));
        assert!(s.cov.diagonal().iter().all(|&v| v > 0.0));
    }
}
