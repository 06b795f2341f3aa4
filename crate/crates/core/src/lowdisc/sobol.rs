//! Sobol' sequence in natural (non Gray-code) order.
//!
//! Direction numbers are the Joe & Kuo (2008) "new-joe-kuo-6" set,
//! restricted to the first 1024 dimensions and bundled as
//! `data/sobol_joe_kuo_1024.txt`.
//! Source: <https://web.maths.unsw.edu.au/~fkuo/sobol/>

use std::sync::OnceLock;

use super::ScrambleState;
use crate::error::{Error, Result};

/// Output precision of the generator, in binary digits.
pub const MAX_BITS: u32 = 32;

const BUNDLED_TABLE: &str = include_str!("../../data/sobol_joe_kuo_1024.txt");

/// Per-dimension direction integers `v_k = m_k << (32 - k)`, `k = 1..=32`.
#[derive(Debug, Clone)]
pub struct DirectionTable {
    vectors: Vec<[u32; 32]>,
}

impl DirectionTable {
    /// Parse a table in the Joe & Kuo text layout: one line per dimension,
    /// `dimension degree polynomial_code m_1 .. m_degree`. Lines starting
    /// with `#` are ignored. Degree 0 denotes the radical-inverse dimension.
    pub fn parse(text: &str) -> Result<Self> {
        let mut vectors = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: &str| Error::DirectionTable {
                line: lineno + 1,
                reason: reason.to_string(),
            };
            let fields: Vec<u64> = line
                .split_whitespace()
                .map(|f| f.parse::<u64>().map_err(|_| bad("non-integer field")))
                .collect::<Result<_>>()?;
            if fields.len() < 3 {
                return Err(bad("expected at least 3 fields"));
            }
            let (index, degree, poly) = (fields[0] as usize, fields[1] as usize, fields[2] as u32);
            if index != vectors.len() + 1 {
                return Err(bad("dimensions must be listed in order starting at 1"));
            }
            if fields.len() != 3 + degree || degree > 31 {
                return Err(bad(
                    "number of initial direction integers must equal the degree",
                ));
            }
            let initial: Vec<u32> = fields[3..].iter().map(|&m| m as u32).collect();
            for (k, &m) in initial.iter().enumerate() {
                // m_k odd and below 2^k: the leading bit of v_k is set.
                if m % 2 == 0 || u64::from(m) >= 1u64 << (k + 1) {
                    return Err(bad("initial direction integer must be odd and below 2^k"));
                }
            }
            vectors.push(direction_vectors(degree, poly, &initial));
        }
        if vectors.is_empty() {
            return Err(Error::DirectionTable {
                line: 0,
                reason: "empty table".into(),
            });
        }
        Ok(Self { vectors })
    }

    /// The bundled 1024-dimension table.
    pub fn bundled() -> &'static DirectionTable {
        static TABLE: OnceLock<DirectionTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            DirectionTable::parse(BUNDLED_TABLE).expect("bundled direction numbers are valid")
        })
    }

    pub fn capacity(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self, dim: usize) -> &[u32; 32] {
        &self.vectors[dim]
    }
}

fn direction_vectors(degree: usize, poly: u32, initial: &[u32]) -> [u32; 32] {
    let mut v = [0u32; 32];
    if degree == 0 {
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = 1u32 << (31 - k);
        }
        return v;
    }
    for k in 0..degree {
        v[k] = initial[k] << (31 - k);
    }
    for k in degree..32 {
        let mut x = v[k - degree] ^ (v[k - degree] >> degree);
        for j in 1..degree {
            if (poly >> (degree - 1 - j)) & 1 == 1 {
                x ^= v[k - j];
            }
        }
        v[k] = x;
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SobolSpec {
    dimension: usize,
    bits: u32,
}

impl SobolSpec {
    /// Full 32-bit precision over `dimension` coordinates.
    pub fn new(dimension: usize) -> Result<Self> {
        Self::with_bits(dimension, MAX_BITS)
    }

    pub fn with_bits(dimension: usize, bits: u32) -> Result<Self> {
        let capacity = DirectionTable::bundled().capacity();
        if dimension == 0 {
            return Err(Error::InvalidArgument(
                "Sobol dimension must be at least 1".into(),
            ));
        }
        if dimension > capacity {
            return Err(Error::Capacity {
                requested: dimension,
                capacity,
            });
        }
        if bits == 0 || bits > MAX_BITS {
            return Err(Error::InvalidArgument(format!(
                "bits must lie in 1..={MAX_BITS}"
            )));
        }
        Ok(Self { dimension, bits })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }
}

/// An `n x dim` row-major block of points in `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    n: usize,
    dim: usize,
    data: Vec<f64>,
}

impl PointSet {
    pub fn from_rows(n: usize, dim: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * dim);
        Self { n, dim, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.data[j..].iter().step_by(self.dim).copied()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

const TWO_POW_32: f64 = 4_294_967_296.0;

/// Points `skip .. skip + n` of the (optionally scrambled) Sobol' sequence.
pub fn sobol_block(
    spec: &SobolSpec,
    scramble: Option<&ScrambleState>,
    n: usize,
    skip: u64,
) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "block size must be at least 1".into(),
        ));
    }
    if skip
        .checked_add(n as u64)
        .map_or(true, |end| end > 1u64 << 32)
    {
        return Err(Error::InvalidArgument(
            "Sobol index range exceeds 2^32".into(),
        ));
    }
    let table = DirectionTable::bundled();
    let dim = spec.dimension;
    let mask = if spec.bits == 32 {
        u32::MAX
    } else {
        !(u32::MAX >> spec.bits)
    };
    let mut data = vec![0.0; n * dim];
    for j in 0..dim {
        let v = table.vectors(j);
        // prefix[c] = v_0 ^ .. ^ v_c: moving from index i to i + 1 flips the
        // trailing ones of i and the following zero.
        let mut prefix = [0u32; 32];
        let mut acc = 0u32;
        for (c, p) in prefix.iter_mut().enumerate() {
            acc ^= v[c];
            *p = acc;
        }
        let mut x = (0..32)
            .filter(|&b| (skip >> b) & 1 == 1)
            .fold(0u32, |acc, b| acc ^ v[b]);
        let key = scramble.map(|s| s.dimension_key(j));
        for i in 0..n {
            let idx = skip + i as u64;
            if i > 0 {
                let c = (idx - 1).trailing_ones() as usize;
                x ^= prefix[c];
            }
            let digits = x & mask;
            data[i * dim + j] = match key {
                None => digits as f64 / TWO_POW_32,
                Some(key) => ScrambleState::scramble_to_unit(key, digits, spec.bits),
            };
        }
    }
    Ok(PointSet { n, dim, data })
}
