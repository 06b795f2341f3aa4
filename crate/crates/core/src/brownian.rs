//! Brownian increments on the grid `delta = 1 / M` of a unit interval,
//! built from `M` uniforms either forward or by Brownian bridge.
//!
//! The bridge draws the endpoint `W_1` from the first uniform and then fills
//! interior grid points coarse to fine: gaps are bisected breadth-first, and
//! a gap `[l, r]` (in grid units) is split at `l + ceil((r - l) / 2)`. For
//! `M = 8` this is the Van der Corput order 4, 2, 6, 1, 3, 5, 7; for `M = 5`
//! it is 3, 2, 4, 1.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::inv_cdf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Construction {
    Forward,
    Bridge,
}

impl Construction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Construction::Forward => "forward",
            Construction::Bridge => "bridge",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct BridgeNode {
    point: usize,
    left: usize,
    right: usize,
    left_coef: f64,
    right_coef: f64,
    sd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    steps: usize,
    construction: Construction,
    plan: Vec<BridgeNode>,
}

/// Interior grid points of `0..=m` in bridge fill order.
pub fn bridge_order(m: usize) -> Vec<usize> {
    let mut order = Vec::with_capacity(m.saturating_sub(1));
    let mut queue = VecDeque::from([(0usize, m)]);
    while let Some((l, r)) = queue.pop_front() {
        if r - l < 2 {
            continue;
        }
        let c = l + (r - l).div_ceil(2);
        order.push(c);
        queue.push_back((l, c));
        queue.push_back((c, r));
    }
    order
}

impl PathSpec {
    pub fn new(steps: usize, construction: Construction) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidArgument("M must be at least 1".into()));
        }
        let delta = 1.0 / steps as f64;
        let mut filled = vec![false; steps + 1];
        filled[0] = true;
        filled[steps] = true;
        let mut plan = Vec::new();
        for c in bridge_order(steps) {
            let left = (0..c)
                .rev()
                .find(|&i| filled[i])
                .expect("grid origin is filled");
            let right = (c + 1..=steps)
                .find(|&i| filled[i])
                .expect("grid end is filled");
            let (s, tp, u) = (left as f64, c as f64, right as f64);
            plan.push(BridgeNode {
                point: c,
                left,
                right,
                left_coef: (u - tp) / (u - s),
                right_coef: (tp - s) / (u - s),
                sd: ((u - tp) * (tp - s) / (u - s) * delta).sqrt(),
            });
            filled[c] = true;
        }
        Ok(Self {
            steps,
            construction,
            plan,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn delta(&self) -> f64 {
        1.0 / self.steps as f64
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    /// Increments `W_{m delta} - W_{(m-1) delta}` for `m = 1..=M`.
    pub fn increments(&self, v: &[f64], out: &mut [f64]) {
        match self.construction {
            Construction::Forward => self.increments_forward(v, out),
            Construction::Bridge => self.increments_bridge(v, out),
        }
    }

    pub fn increments_forward(&self, v: &[f64], out: &mut [f64]) {
        let sd = self.delta().sqrt();
        for (o, &vm) in out.iter_mut().zip(&v[..self.steps]) {
            *o = sd * inv_cdf(vm);
        }
    }

    pub fn increments_bridge(&self, v: &[f64], out: &mut [f64]) {
        let m = self.steps;
        let mut path = [0.0f64; 64];
        let mut heap_path;
        let path: &mut [f64] = if m < 64 {
            &mut path[..=m]
        } else {
            heap_path = vec![0.0; m + 1];
            &mut heap_path
        };
        path[0] = 0.0;
        path[m] = inv_cdf(v[0]);
        for (node, &vk) in self.plan.iter().zip(&v[1..m]) {
            path[node.point] = node.left_coef * path[node.left]
                + node.right_coef * path[node.right]
                + node.sd * inv_cdf(vk);
        }
        for (k, o) in out[..m].iter_mut().enumerate() {
            *o = path[k + 1] - path[k];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fill_orders() {
        assert_eq!(bridge_order(8), vec![4, 2, 6, 1, 3, 5, 7]);
        assert_eq!(bridge_order(5), vec![3, 2, 4, 1]);
        assert_eq!(bridge_order(10)[..3], [5, 3, 8]);
        assert!(bridge_order(1).is_empty());
        for m in 1..40 {
            let mut o = bridge_order(m);
            o.sort();
            assert_eq!(o, (1..m).collect::<Vec<_>>());
        }
    }

    #[test]
    fn midpoint_conditional_variance() {
        let spec = PathSpec::new(2, Construction::Bridge).unwrap();
        let node = spec.plan[0];
        assert_eq!(node.point, 1);
        // (u - t')(t' - s) / (u - s) with s = 0, t' = 1/2, u = 1.
        assert!((node.sd * node.sd - 0.25).abs() < 1e-15);
        assert_eq!((node.left_coef, node.right_coef), (0.5, 0.5));
    }

    #[test]
    fn central_uniforms_give_flat_path() {
        for construction in [Construction::Forward, Construction::Bridge] {
            let spec = PathSpec::new(7, construction).unwrap();
            let mut out = [1.0; 7];
            spec.increments(&[0.5; 7], &mut out);
            assert_eq!(out, [0.0; 7]);
        }
    }

    #[test]
    fn single_step_forward() {
        let spec = PathSpec::new(1, Construction::Forward).unwrap();
        let mut out = [0.0];
        spec.increments(&[0.841_344_746_068_542_9], &mut out);
        assert!((out[0] - 1.0).abs() < 1e-12);
        let bridge = PathSpec::new(1, Construction::Bridge).unwrap();
        let mut out_b = [0.0];
        bridge.increments(&[0.841_344_746_068_542_9], &mut out_b);
        assert_eq!(out, out_b);
    }

    #[test]
    fn bridge_endpoint_is_first_uniform() {
        let spec = PathSpec::new(4, Construction::Bridge).unwrap();
        let mut out = [0.0; 4];
        spec.increments(&[0.975, 0.3, 0.8, 0.1], &mut out);
        assert!((out.iter().sum::<f64>() - inv_cdf(0.975)).abs() < 1e-12);
    }

    #[test]
    fn boundary_uniforms_are_clamped() {
        let spec = PathSpec::new(3, Construction::Forward).unwrap();
        let mut out = [0.0; 3];
        spec.increments(&[0.0, 1.0, 0.5], &mut out);
        assert!(out.iter().all(|x| x.is_finite()));
        assert!(out[0] < 0.0 && out[1] > 0.0);
    }
}
