//! Sparse polynomials in commuting indeterminates `X_1, …, X_d` with real
//! coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::mindex::MultiIndex;
use crate::scalar::Scalar;

#[derive(Clone, PartialEq)]
pub struct Polynomial<T> {
    d: usize,
    // no stored coefficient is zero
    terms: BTreeMap<MultiIndex, T>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn zero(d: usize) -> Self {
        Self {
            d,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(d: usize) -> Self {
        Self::monomial(MultiIndex::zero(d))
    }

    pub fn monomial(m: MultiIndex) -> Self {
        Self::term(m, T::one())
    }

    pub fn term(m: MultiIndex, c: T) -> Self {
        let mut p = Self::zero(m.dim());
        p.add_term(m, c);
        p
    }

    /// `X_j`, 0-based.
    pub fn coordinate(d: usize, j: usize) -> Self {
        Self::monomial(MultiIndex::unit(d, j))
    }

    pub fn from_terms(d: usize, terms: impl IntoIterator<Item = (MultiIndex, T)>) -> Self {
        let mut p = Self::zero(d);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `-1` for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.terms
            .keys()
            .map(|m| m.degree() as i64)
            .max()
            .unwrap_or(-1)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &T)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &MultiIndex) -> T {
        self.terms.get(m).cloned().unwrap_or_else(T::zero)
    }

    pub fn add_term(&mut self, m: MultiIndex, c: T) {
        assert_eq!(m.dim(), self.d, "multi-index dimension mismatch");
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&m) {
            Some(old) => {
                let s = old + c;
                if !s.is_zero() {
                    self.terms.insert(m, s);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    /// `self += c · other`.
    pub fn add_scaled(&mut self, c: &T, other: &Self) {
        if c.is_zero() {
            return;
        }
        for (m, v) in &other.terms {
            self.add_term(m.clone(), v.clone() * c);
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        if c.is_zero() {
            return Self::zero(self.d);
        }
        Self {
            d: self.d,
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v.clone() * c))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        }
    }

    /// `X_j · p`, 0-based coordinate.
    pub fn coordinate_multiply(&self, j: usize) -> Self {
        assert!(j < self.d, "coordinate out of range");
        Self {
            d: self.d,
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.raised(j), v.clone()))
                .collect(),
        }
    }

    /// Terms of total degree exactly `n`.
    pub fn graded_component(&self, n: usize) -> Self {
        Self {
            d: self.d,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == n)
                .map(|(m, v)| (m.clone(), v.clone()))
                .collect(),
        }
    }

    pub fn evaluate(&self, x: &[T]) -> T {
        assert_eq!(x.len(), self.d, "point dimension mismatch");
        self.terms.iter().fold(T::zero(), |acc, (m, c)| {
            let mut t = c.clone();
            for (xi, &e) in x.iter().zip(m.exponents()) {
                for _ in 0..e {
                    t = t * xi;
                }
            }
            acc + t
        })
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Polynomial<U> {
        Polynomial::from_terms(self.d, self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }
}

impl<T: Scalar> Add for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn add(self, rhs: Self) -> Polynomial<T> {
        let mut out = self.clone();
        out.add_scaled(&T::one(), rhs);
        out
    }
}

impl<T: Scalar> Sub for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn sub(self, rhs: Self) -> Polynomial<T> {
        let mut out = self.clone();
        out.add_scaled(&-T::one(), rhs);
        out
    }
}

impl<T: Scalar> Neg for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn neg(self) -> Polynomial<T> {
        self.scale(&-T::one())
    }
}

impl<T: Scalar> Mul for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn mul(self, rhs: Self) -> Polynomial<T> {
        assert_eq!(self.d, rhs.d, "dimension mismatch");
        let mut out = Polynomial::zero(self.d);
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                out.add_term(a.sum(b), x.clone() * y);
            }
        }
        out
    }
}

impl<T: Scalar> fmt::Display for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // highest degree first
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| b.degree().cmp(&a.degree()).then(b.cmp(a)));
        for (i, (m, c)) in terms.into_iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            if m.degree() > 0 {
                write!(f, "·")?;
                let factors: Vec<String> = m
                    .exponents()
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(j, &e)| format!("X{}^{}", j + 1, e))
                    .collect();
                write!(f, "{}", factors.join(" "))?;
            }
        }
        Ok(())
    }
}

impl<T: Scalar> fmt::Debug for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({self})")
    }
}
