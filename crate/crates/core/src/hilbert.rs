//! Hilbert-curve ordering of particle clouds.
//!
//! Keys are computed with Skilling's transpose construction ("Programming
//! the Hilbert curve", 2004): coordinates are quantised to `bits` binary
//! digits per axis, turned into the transposed Hilbert index in place, and
//! the transposed digits are interleaved into a single `u64`.

use crate::error::{Error, Result};

/// Clamp margin for the logistic transform.
pub const PSI_EPS: f64 = 1.0 / 1_073_741_824.0; // 2^-30

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertConfig {
    dim: usize,
    bits: u32,
}

impl HilbertConfig {
    pub fn new(dim: usize, bits: u32) -> Result<Self> {
        if dim == 0 || bits == 0 {
            return Err(Error::InvalidArgument(
                "Hilbert dimension and bits must be positive".into(),
            ));
        }
        if dim as u64 * u64::from(bits) > 64 {
            return Err(Error::InvalidArgument(format!(
                "{dim} axes x {bits} bits exceeds a 64-bit key"
            )));
        }
        Ok(Self { dim, bits })
    }

    /// `floor(62 / dim)` bits per axis (at least one).
    pub fn with_default_bits(dim: usize) -> Result<Self> {
        Self::new(dim, (62 / dim.max(1)).max(1) as u32)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn total_bits(&self) -> u32 {
        self.dim as u32 * self.bits
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HilbertKey(pub u64);

fn quantise(p: f64, bits: u32) -> u64 {
    let side = (1u64 << bits) as f64;
    let q = (p * side).floor();
    if q.is_nan() || q <= 0.0 {
        0
    } else {
        (q as u64).min((1u64 << bits) - 1)
    }
}

fn axes_to_transpose(x: &mut [u64], bits: u32) {
    let n = x.len();
    let top = 1u64 << (bits - 1);
    let mut q = top;
    while q > 1 {
        let p = q - 1;
        for i in 0..n {
            if x[i] & q != 0 {
                x[0] ^= p;
            } else {
                let t = (x[0] ^ x[i]) & p;
                x[0] ^= t;
                x[i] ^= t;
            }
        }
        q >>= 1;
    }
    for i in 1..n {
        x[i] ^= x[i - 1];
    }
    let mut t = 0;
    let mut q = top;
    while q > 1 {
        if x[n - 1] & q != 0 {
            t ^= q - 1;
        }
        q >>= 1;
    }
    for xi in x.iter_mut() {
        *xi ^= t;
    }
}

fn transpose_to_axes(x: &mut [u64], bits: u32) {
    let n = x.len();
    let end = 2u64 << (bits - 1);
    let t = x[n - 1] >> 1;
    for i in (1..n).rev() {
        x[i] ^= x[i - 1];
    }
    x[0] ^= t;
    let mut q = 2u64;
    while q != end {
        let p = q - 1;
        for i in (0..n).rev() {
            if x[i] & q != 0 {
                x[0] ^= p;
            } else {
                let t = (x[0] ^ x[i]) & p;
                x[0] ^= t;
                x[i] ^= t;
            }
        }
        q <<= 1;
    }
}

fn interleave(x: &[u64], bits: u32) -> u64 {
    let mut key = 0u64;
    for level in (0..bits).rev() {
        for &xi in x {
            key = (key << 1) | ((xi >> level) & 1);
        }
    }
    key
}

fn deinterleave(key: u64, dim: usize, bits: u32, x: &mut [u64]) {
    x.iter_mut().for_each(|xi| *xi = 0);
    let mut shift = dim as u32 * bits;
    for level in (0..bits).rev() {
        for xi in x.iter_mut() {
            shift -= 1;
            *xi |= ((key >> shift) & 1) << level;
        }
    }
}

/// Hilbert key of the grid cell holding integer coordinates `cell`.
pub fn cell_key(cell: &[u64], cfg: &HilbertConfig) -> HilbertKey {
    debug_assert_eq!(cell.len(), cfg.dim);
    if cfg.dim == 1 {
        return HilbertKey(cell[0]);
    }
    let mut x = [0u64; 64];
    let x = &mut x[..cfg.dim];
    x.copy_from_slice(cell);
    axes_to_transpose(x, cfg.bits);
    HilbertKey(interleave(x, cfg.bits))
}

/// Integer coordinates of cell `key`.
pub fn key_cell(key: HilbertKey, cfg: &HilbertConfig) -> Result<Vec<u64>> {
    let total = cfg.total_bits();
    if total < 64 && key.0 >> total != 0 {
        return Err(Error::KeyOutOfRange {
            key: key.0,
            bits: total,
        });
    }
    if cfg.dim == 1 {
        return Ok(vec![key.0]);
    }
    let mut x = vec![0u64; cfg.dim];
    deinterleave(key.0, cfg.dim, cfg.bits, &mut x);
    transpose_to_axes(&mut x, cfg.bits);
    Ok(x)
}

/// Position along the order-`bits` curve of the cell containing `p`.
/// Coordinates outside `[0, 1)` are clamped to the boundary cells.
pub fn hilbert_key(p: &[f64], cfg: &HilbertConfig) -> HilbertKey {
    let mut cell = [0u64; 64];
    let cell = &mut cell[..cfg.dim];
    for (c, &pi) in cell.iter_mut().zip(p) {
        *c = quantise(pi, cfg.bits);
    }
    cell_key(cell, cfg)
}

/// Centre of cell `key`; the forward map of the discretised curve.
pub fn hilbert_point(key: HilbertKey, cfg: &HilbertConfig) -> Result<Vec<f64>> {
    let side = (1u64 << cfg.bits) as f64;
    Ok(key_cell(key, cfg)?
        .into_iter()
        .map(|c| (c as f64 + 0.5) / side)
        .collect())
}

/// Componentwise logistic map `R^d -> (0, 1)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiTransform {
    location: Vec<f64>,
    scale: Vec<f64>,
}

impl PsiTransform {
    pub fn new(location: Vec<f64>, scale: Vec<f64>) -> Result<Self> {
        if location.len() != scale.len() {
            return Err(Error::InvalidArgument(
                "location and scale lengths differ".into(),
            ));
        }
        if scale.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidArgument(
                "logistic scale must be positive and finite".into(),
            ));
        }
        Ok(Self { location, scale })
    }

    /// Location = mean, scale = 2 (std + eps) of an `n x dim` row-major cloud.
    pub fn from_cloud(states: &[f64], dim: usize) -> Result<Self> {
        let n = states.len() / dim;
        if n == 0 {
            return Err(Error::InvalidArgument("empty particle cloud".into()));
        }
        let mut mean = vec![0.0; dim];
        for row in states.chunks_exact(dim) {
            for (m, x) in mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = vec![0.0; dim];
        for row in states.chunks_exact(dim) {
            for ((v, x), m) in var.iter_mut().zip(row).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        if mean.iter().chain(&var).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(
                "particle cloud has non-finite moments".into(),
            ));
        }
        let scale = var
            .iter()
            .map(|v| 2.0 * ((v / n as f64).sqrt() + PSI_EPS))
            .collect();
        Self::new(mean, scale)
    }

    pub fn dim(&self) -> usize {
        self.location.len()
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        for k in 0..self.location.len() {
            if !x[k].is_finite() {
                return Err(Error::NonFinite(format!("state component {k} is {}", x[k])));
            }
            let z = (x[k] - self.location[k]) / self.scale[k];
            out[k] = (1.0 / (1.0 + (-z).exp())).clamp(PSI_EPS, 1.0 - PSI_EPS);
        }
        Ok(())
    }
}

/// Stable argsort of `values` (ties keep their original order).
pub fn argsort(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

/// Permutation `sigma` (0-based) ordering `points` (`n x dim`, row-major)
/// along the Hilbert curve after the `psi` transform. For `dim == 1` the
/// raw scalars are sorted directly.
pub fn hilbert_sort_permutation(
    points: &[f64],
    psi: &PsiTransform,
    cfg: &HilbertConfig,
) -> Result<Vec<usize>> {
    let dim = cfg.dim;
    if psi.dim() != dim {
        return Err(Error::InvalidArgument(
            "psi and Hilbert dimensions differ".into(),
        ));
    }
    if dim == 1 {
        if let Some(bad) = points.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!(
                "particle {bad} is {}",
                points[bad]
            )));
        }
        return Ok(argsort(points));
    }
    let mut unit = vec![0.0; dim];
    let mut keys = Vec::with_capacity(points.len() / dim);
    for row in points.chunks_exact(dim) {
        psi.apply(row, &mut unit)?;
        keys.push(hilbert_key(&unit, cfg));
    }
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by_key(|&i| keys[i]);
    Ok(idx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimension_is_scaling() {
        let cfg = HilbertConfig::new(1, 8).unwrap();
        assert_eq!(hilbert_key(&[0.5], &cfg), HilbertKey(128));
        assert_eq!(hilbert_key(&[0.0], &cfg), HilbertKey(0));
        assert_eq!(hilbert_key(&[0.999_999], &cfg), HilbertKey(255));
        assert_eq!(
            hilbert_point(HilbertKey(3), &cfg).unwrap(),
            vec![3.5 / 256.0]
        );
    }

    // Brute-force order-1 curve in 2-D: the visit order of the four cells must
    // be a U, i.e. every step moves one cell along one axis.
    #[test]
    fn order_one_square_is_u_shaped() {
        let cfg = HilbertConfig::new(2, 1).unwrap();
        let mut cells: Vec<(u64, [u64; 2])> = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                cells.push((cell_key(&[x, y], &cfg).0, [x, y]));
            }
        }
        cells.sort();
        assert_eq!(
            cells.iter().map(|c| c.0).collect::<Vec<_>>(),
            vec![0, 1, 2, 3]
        );
        for w in cells.windows(2) {
            let d: u64 = w[0]
                .1
                .iter()
                .zip(&w[1].1)
                .map(|(a, b)| a.abs_diff(*b))
                .sum();
            assert_eq!(d, 1);
        }
        // A U, not a Z: first and last cells are also adjacent.
        let d: u64 = cells[0]
            .1
            .iter()
            .zip(&cells[3].1)
            .map(|(a, b)| a.abs_diff(*b))
            .sum();
        assert_eq!(d, 1);
    }

    #[test]
    fn key_out_of_range() {
        let cfg = HilbertConfig::new(2, 4).unwrap();
        assert!(matches!(
            hilbert_point(HilbertKey(256), &cfg),
            Err(Error::KeyOutOfRange { .. })
        ));
        assert!(hilbert_point(HilbertKey(255), &cfg).is_ok());
    }

    #[test]
    fn config_limits() {
        assert!(HilbertConfig::new(8, 8).is_ok());
        assert!(HilbertConfig::new(8, 9).is_err());
        assert_eq!(HilbertConfig::with_default_bits(5).unwrap().bits(), 12);
        assert_eq!(HilbertConfig::with_default_bits(1).unwrap().bits(), 62);
    }

    #[test]
    fn psi_examples() {
        let psi = PsiTransform::new(vec![0.0, 1.0], vec![1.0, 2.0]).unwrap();
        let mut out = [0.0; 2];
        psi.apply(&[3f64.ln(), 1.0], &mut out).unwrap();
        assert!((out[0] - 0.75).abs() < 1e-15);
        assert_eq!(out[1], 0.5);
        psi.apply(&[1e300, -1e300], &mut out).unwrap();
        assert_eq!(out, [1.0 - PSI_EPS, PSI_EPS]);
        assert!(psi.apply(&[f64::NAN, 0.0], &mut out).is_err());
        assert!(PsiTransform::new(vec![0.0], vec![0.0]).is_err());
    }

    #[test]
    fn scalar_sort_and_ties() {
        let psi = PsiTransform::new(vec![0.0], vec![1.0]).unwrap();
        let cfg = HilbertConfig::with_default_bits(1).unwrap();
        assert_eq!(
            hilbert_sort_permutation(&[3.0, 1.0, 2.0], &psi, &cfg).unwrap(),
            vec![1, 2, 0]
        );
        let cfg2 = HilbertConfig::with_default_bits(2).unwrap();
        let psi2 = PsiTransform::new(vec![0.0; 2], vec![1.0; 2]).unwrap();
        let same = vec![0.3; 2 * 7];
        assert_eq!(
            hilbert_sort_permutation(&same, &psi2, &cfg2).unwrap(),
            (0..7).collect::<Vec<_>>()
        );
    }
}
