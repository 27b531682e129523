//! Multi-index combinatorics and the symmetric tensor basis.
//!
//! A level `n` in dimension `d` is the set of exponent vectors of total degree
//! `n`. The order used everywhere (files included) is graded-lexicographic,
//! descending in the first coordinate: `(2,0), (1,1), (0,2)`.
//!
//! The symmetric basis tensor `ê_m` is the image of
//! `e_1^{⊗m_1} ⊗ … ⊗ e_d^{⊗m_d}` under the averaging symmetrizer. With that
//! normalization `e_j ⊗̂ ê_m = ê_{m+e_j}` and the tensor scalar product is
//! diagonal with `⟨ê_m, ê_m⟩ = m!/n!`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::One;

use crate::linalg::Matrix;
use crate::scalar::{Rational, Scalar};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl MultiIndex {
    /// Panics if `exponents` is empty (d must be at least 1).
    pub fn new(exponents: Vec<u32>) -> Self {
        assert!(!exponents.is_empty(), "multi-index needs d >= 1");
        Self(exponents)
    }

    pub fn zero(d: usize) -> Self {
        Self::new(vec![0; d])
    }

    /// `e_j`, 0-based coordinate.
    pub fn unit(d: usize, j: usize) -> Self {
        let mut v = vec![0; d];
        v[j] = 1;
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, j: usize) -> u32 {
        self.0[j]
    }

    /// `m + e_j`.
    pub fn raised(&self, j: usize) -> Self {
        let mut v = self.0.clone();
        v[j] += 1;
        Self(v)
    }

    /// `m - e_j`, if that stays non-negative.
    pub fn lowered(&self, j: usize) -> Option<Self> {
        let mut v = self.0.clone();
        v[j] = v[j].checked_sub(1)?;
        Some(Self(v))
    }

    pub fn sum(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `m! = ∏_j m_j!`.
    pub fn factorial(&self) -> BigInt {
        self.0.iter().map(|&e| factorial(e as usize)).product()
    }

    /// Number of nonzero exponents.
    pub fn support_size(&self) -> usize {
        self.0.iter().filter(|&&e| e > 0).count()
    }

    /// The nondecreasing word `(j_1 ≤ … ≤ j_n)` of 0-based coordinates with
    /// occupation numbers `m`.
    pub fn canonical_word(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(j, &e)| std::iter::repeat_n(j, e as usize))
            .collect()
    }

    /// Occupation numbers of a word over `d` coordinates.
    pub fn from_word(d: usize, word: &[usize]) -> Self {
        let mut v = vec![0u32; d];
        for &j in word {
            v[j] += 1;
        }
        Self::new(v)
    }
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `C(n+d-1, d-1)`: number of monomials of degree `n` in `d` variables.
pub fn level_dimension(d: usize, n: usize) -> usize {
    assert!(d >= 1, "dimension must be positive");
    binomial(n + d - 1, d - 1)
}

/// All multi-indices of degree `n`, descending in the first coordinate.
pub fn enumerate_level(d: usize, n: usize) -> Vec<MultiIndex> {
    assert!(d >= 1, "dimension must be positive");
    let mut out = Vec::with_capacity(level_dimension(d, n));
    let mut cur = vec![0u32; d];
    fill(&mut cur, 0, n, &mut out);
    out
}

fn fill(cur: &mut Vec<u32>, pos: usize, remaining: usize, out: &mut Vec<MultiIndex>) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining as u32;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for v in (0..=remaining).rev() {
        cur[pos] = v as u32;
        fill(cur, pos + 1, remaining - v, out);
    }
}

/// Position of `m` inside `enumerate_level(m.dim(), m.degree())`.
pub fn position_in_level(m: &MultiIndex) -> usize {
    let d = m.dim();
    let mut remaining = m.degree();
    let mut pos = 0;
    for i in 0..d - 1 {
        let mi = m.get(i) as usize;
        // indices with a larger value at coordinate i come first
        for v in mi + 1..=remaining {
            pos += level_dimension(d - i - 1, remaining - v);
        }
        remaining -= mi;
    }
    pos
}

/// All multi-indices of degree `<= n`, level by level.
pub fn enumerate_up_to(d: usize, n: usize) -> Vec<MultiIndex> {
    (0..=n).flat_map(|k| enumerate_level(d, k)).collect()
}

/// Level `n` of the symmetric tensor power of `ℂ^d` with its diagonal metric.
#[derive(Debug, Clone)]
pub struct LevelBasis {
    pub d: usize,
    pub n: usize,
    pub indices: Vec<MultiIndex>,
    /// Diagonal of `T_n`: `m!/n!` in `indices` order.
    pub metric: Vec<Rational>,
}

impl LevelBasis {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn position(&self, m: &MultiIndex) -> usize {
        debug_assert_eq!(m.degree(), self.n);
        position_in_level(m)
    }
}

pub fn tensor_metric(d: usize, n: usize) -> LevelBasis {
    let indices = enumerate_level(d, n);
    let nfact = factorial(n);
    let metric = indices
        .iter()
        .map(|m| Rational::new(m.factorial(), nfact.clone()))
        .collect();
    LevelBasis {
        d,
        n,
        indices,
        metric,
    }
}

/// Matrix of `ξ ↦ e_j ⊗̂ ξ` from level `n` to level `n+1`: one unit entry
/// per column, `ê_m ↦ ê_{m+e_j}`.
pub fn creation_shift<T: Scalar>(d: usize, n: usize, j: usize) -> Matrix<T> {
    let from = enumerate_level(d, n);
    let mut s = Matrix::zeros(level_dimension(d, n + 1), from.len());
    for (c, m) in from.iter().enumerate() {
        s[(position_in_level(&m.raised(j)), c)] = T::one();
    }
    s
}
