//! Moment functionals (states on the polynomial algebra).
//!
//! A [`MomentFunctional`] stores `φ(X^m)` densely for every multi-index of
//! degree up to `max_degree`. Missing entries are errors, never imputed.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, FormatError, Result};
use crate::linalg::{check_psd, Matrix};
use crate::mindex::{enumerate_up_to, factorial, MultiIndex};
use crate::poly::Polynomial;
use crate::scalar::{Backend, Rational, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub enum MomentSource {
    Catalog(String),
    File(String),
    Samples(usize),
    Explicit,
    /// Vacuum expectations of a reconstructed Fock space.
    Reconstructed,
}

impl fmt::Display for MomentSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MomentSource::Catalog(name) => write!(f, "catalog:{name}"),
            MomentSource::File(path) => write!(f, "file:{path}"),
            MomentSource::Samples(n) => write!(f, "samples:{n}"),
            MomentSource::Explicit => write!(f, "explicit"),
            MomentSource::Reconstructed => write!(f, "reconstructed"),
        }
    }
}

/// Built-in measures with closed-form rational moments.
#[derive(Debug, Clone, PartialEq)]
pub enum CatalogMeasure {
    /// Product of standard normals.
    GaussianProduct,
    /// Uniform on `[-1, 1]^d`.
    UniformBox,
    /// Product of Exp(1).
    ExponentialProduct,
    /// Product of symmetric ±1 coins.
    RademacherProduct,
    /// Finite atomic measure: `(point, weight)` pairs, weights summing to 1.
    Atoms(Vec<(Vec<Rational>, Rational)>),
    /// Uniform on the unit circle in ℝ² (d = 2 only).
    CircleUniform,
}

impl CatalogMeasure {
    pub const NAMES: [&'static str; 6] = [
        "gaussian_product",
        "uniform_box",
        "exponential_product",
        "rademacher_product",
        "atoms",
        "circle_uniform",
    ];

    /// Parses a name; `atoms` takes its support from `atoms`.
    pub fn parse(name: &str, atoms: Vec<(Vec<Rational>, Rational)>) -> Result<Self> {
        Ok(match name {
            "gaussian_product" => Self::GaussianProduct,
            "uniform_box" => Self::UniformBox,
            "exponential_product" => Self::ExponentialProduct,
            "rademacher_product" => Self::RademacherProduct,
            "circle_uniform" => Self::CircleUniform,
            "atoms" => Self::Atoms(atoms),
            other => return Err(Error::UnknownMeasure(other.to_string())),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::GaussianProduct => "gaussian_product",
            Self::UniformBox => "uniform_box",
            Self::ExponentialProduct => "exponential_product",
            Self::RademacherProduct => "rademacher_product",
            Self::Atoms(_) => "atoms",
            Self::CircleUniform => "circle_uniform",
        }
    }

    /// Whether the measure is invariant under `x ↦ -x`.
    pub fn is_symmetric(&self) -> bool {
        match self {
            Self::GaussianProduct
            | Self::UniformBox
            | Self::RademacherProduct
            | Self::CircleUniform => true,
            Self::ExponentialProduct => false,
            Self::Atoms(atoms) => {
                let mut neg: Vec<_> = atoms
                    .iter()
                    .map(|(p, w)| (p.iter().map(|x| -x.clone()).collect::<Vec<_>>(), w.clone()))
                    .collect();
                let mut pos = atoms.clone();
                pos.sort_by(|a, b| a.0.cmp(&b.0));
                neg.sort_by(|a, b| a.0.cmp(&b.0));
                pos == neg
            }
        }
    }

    fn moment(&self, m: &MultiIndex) -> Rational {
        let product = |one_dim: fn(u32) -> Rational| {
            m.exponents()
                .iter()
                .fold(Rational::one(), |acc, &k| acc * one_dim(k))
        };
        match self {
            Self::GaussianProduct => product(gaussian_moment),
            Self::UniformBox => product(uniform_moment),
            Self::ExponentialProduct => product(exponential_moment),
            Self::RademacherProduct => product(rademacher_moment),
            Self::Atoms(atoms) => atoms
                .iter()
                .map(|(x, w)| {
                    x.iter()
                        .zip(m.exponents())
                        .fold(w.clone(), |acc, (xi, &e)| acc * pow(xi, e))
                })
                .fold(Rational::zero(), |acc, t| acc + t),
            Self::CircleUniform => circle_moment(m.get(0), m.get(1)),
        }
    }
}

fn pow(x: &Rational, e: u32) -> Rational {
    (0..e).fold(Rational::one(), |acc, _| acc * x)
}

/// `(2k-1)!!` with `(-1)!! = 1`.
fn double_factorial_odd(k: u32) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(2 * i - 1))
}

/// Standard normal: `(k-1)!!` for even `k`, else 0.
pub fn gaussian_moment(k: u32) -> Rational {
    if k % 2 == 1 {
        return Rational::zero();
    }
    Rational::from_integer(double_factorial_odd(k / 2))
}

/// Uniform on `[-1, 1]`: `1/(k+1)` for even `k`, else 0.
pub fn uniform_moment(k: u32) -> Rational {
    if k % 2 == 1 {
        return Rational::zero();
    }
    Rational::new(BigInt::one(), BigInt::from(k + 1))
}

/// Exp(1): `k!`.
pub fn exponential_moment(k: u32) -> Rational {
    Rational::from_integer(factorial(k as usize))
}

/// ±1 coin: 1 for even `k`, else 0.
pub fn rademacher_moment(k: u32) -> Rational {
    if k % 2 == 1 {
        Rational::zero()
    } else {
        Rational::one()
    }
}

/// `E[cos^a θ sin^b θ]` for θ uniform: `(a-1)!!(b-1)!!/(a+b)!!` for even `a, b`.
pub fn circle_moment(a: u32, b: u32) -> Rational {
    if a % 2 == 1 || b % 2 == 1 {
        return Rational::zero();
    }
    let even_df = |k: u32| (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(2 * i));
    Rational::new(
        double_factorial_odd(a / 2) * double_factorial_odd(b / 2),
        even_df((a + b) / 2),
    )
}

#[derive(Debug, Clone)]
pub struct MomentFunctional<T> {
    d: usize,
    max_degree: usize,
    source: MomentSource,
    values: HashMap<MultiIndex, T>,
}

impl<T: Scalar> MomentFunctional<T> {
    pub fn from_catalog(measure: &CatalogMeasure, d: usize, max_degree: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Dimension("d must be at least 1".into()));
        }
        match measure {
            CatalogMeasure::CircleUniform if d != 2 => {
                return Err(Error::Dimension(format!(
                    "circle_uniform requires d = 2, got {d}"
                )))
            }
            CatalogMeasure::Atoms(atoms) => validate_atoms(atoms, d)?,
            _ => {}
        }
        let values = enumerate_up_to(d, max_degree)
            .into_iter()
            .map(|m| {
                let v = T::from_rational(&measure.moment(&m));
                (m, v)
            })
            .collect();
        Ok(Self {
            d,
            max_degree,
            source: MomentSource::Catalog(measure.name().to_string()),
            values,
        })
    }

    /// Validates normalization, completeness up to `max_degree` and absence of
    /// duplicates or out-of-range entries.
    pub fn from_values(
        d: usize,
        max_degree: usize,
        entries: impl IntoIterator<Item = (MultiIndex, T)>,
        source: MomentSource,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::Dimension("d must be at least 1".into()));
        }
        let mut values = HashMap::new();
        for (m, v) in entries {
            if m.dim() != d {
                return Err(Error::Dimension(format!(
                    "moment index {m:?} has length {}, expected {d}",
                    m.dim()
                )));
            }
            if m.degree() > max_degree {
                return Err(Error::Inconsistent(format!(
                    "moment {m:?} has degree above max_degree {max_degree}"
                )));
            }
            if values.insert(m.clone(), v).is_some() {
                return Err(Error::Inconsistent(format!("duplicate moment {m:?}")));
            }
        }
        for m in enumerate_up_to(d, max_degree) {
            if !values.contains_key(&m) {
                return Err(Error::MissingMoment(m.exponents().to_vec()));
            }
        }
        let one = &values[&MultiIndex::zero(d)];
        let tol = 1e-12;
        if !(one.clone() - T::one()).is_negligible(tol) {
            return Err(Error::Normalization(one.to_string()));
        }
        Ok(Self {
            d,
            max_degree,
            source,
            values,
        })
    }

    /// Empirical moments `Σ w_i x_i^m`; uniform weights when none are given.
    pub fn from_samples(
        points: &[Vec<T>],
        weights: Option<&[T]>,
        max_degree: usize,
    ) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::EmptySamples);
        };
        let d = first.len();
        if d == 0 || points.iter().any(|p| p.len() != d) {
            return Err(Error::Dimension(
                "sample points must share a positive dimension".into(),
            ));
        }
        let weights: Vec<T> = match weights {
            Some(w) => {
                if w.len() != points.len() {
                    return Err(Error::Weights(format!(
                        "{} weights for {} points",
                        w.len(),
                        points.len()
                    )));
                }
                let total = w.iter().fold(T::zero(), |acc, x| acc + x);
                if !(total.clone() - T::one()).is_negligible(1e-12) {
                    return Err(Error::Weights(format!(
                        "weights sum to {total}, expected 1"
                    )));
                }
                w.to_vec()
            }
            None => vec![T::one() / T::from_i64(points.len() as i64); points.len()],
        };
        let indices = enumerate_up_to(d, max_degree);
        let mut values: HashMap<MultiIndex, T> =
            indices.iter().map(|m| (m.clone(), T::zero())).collect();
        for (x, w) in points.iter().zip(&weights) {
            for m in &indices {
                let mut t = w.clone();
                for (xi, &e) in x.iter().zip(m.exponents()) {
                    for _ in 0..e {
                        t = t * xi;
                    }
                }
                let slot = values.get_mut(m).expect("present");
                *slot = slot.clone() + t;
            }
        }
        // normalization is exact by construction; pin it
        values.insert(MultiIndex::zero(d), T::one());
        Ok(Self {
            d,
            max_degree,
            source: MomentSource::Samples(points.len()),
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn source(&self) -> &MomentSource {
        &self.source
    }

    pub fn with_source(mut self, source: MomentSource) -> Self {
        self.source = source;
        self
    }

    pub fn moment(&self, m: &MultiIndex) -> Result<&T> {
        if m.degree() > self.max_degree {
            return Err(Error::InsufficientMoments {
                needed: m.degree(),
                available: self.max_degree,
            });
        }
        self.values
            .get(m)
            .ok_or_else(|| Error::MissingMoment(m.exponents().to_vec()))
    }

    /// Restricts to moments of degree `<= max_degree`.
    pub fn truncated(&self, max_degree: usize) -> Self {
        let max_degree = max_degree.min(self.max_degree);
        Self {
            d: self.d,
            max_degree,
            source: self.source.clone(),
            values: self
                .values
                .iter()
                .filter(|(m, _)| m.degree() <= max_degree)
                .map(|(m, v)| (m.clone(), v.clone()))
                .collect(),
        }
    }

    /// All moments in graded-lex order.
    pub fn entries(&self) -> Vec<(MultiIndex, T)> {
        enumerate_up_to(self.d, self.max_degree)
            .into_iter()
            .map(|m| {
                let v = self.values[&m].clone();
                (m, v)
            })
            .collect()
    }

    pub fn require_degree(&self, needed: usize) -> Result<()> {
        if needed > self.max_degree {
            return Err(Error::InsufficientMoments {
                needed,
                available: self.max_degree,
            });
        }
        Ok(())
    }

    /// `φ(p)`.
    pub fn apply(&self, p: &Polynomial<T>) -> Result<T> {
        assert_eq!(p.dim(), self.d, "polynomial dimension mismatch");
        self.require_degree(p.degree().max(0) as usize)?;
        Ok(p.terms()
            .fold(T::zero(), |acc, (m, c)| acc + c.clone() * &self.values[m]))
    }

    /// `⟨a, b⟩_φ = φ(a b)` without materializing the product.
    pub fn pair(&self, a: &Polynomial<T>, b: &Polynomial<T>) -> Result<T> {
        if a.is_zero() || b.is_zero() {
            return Ok(T::zero());
        }
        self.require_degree((a.degree() + b.degree()) as usize)?;
        let mut acc = T::zero();
        for (s, x) in a.terms() {
            for (t, y) in b.terms() {
                acc = acc + x.clone() * y * &self.values[&s.sum(t)];
            }
        }
        Ok(acc)
    }

    /// `[φ(a_i b_j)]`.
    pub fn gram(&self, a: &[Polynomial<T>], b: &[Polynomial<T>]) -> Result<Matrix<T>> {
        let mut rows = Vec::with_capacity(a.len());
        for ai in a {
            let mut row = Vec::with_capacity(b.len());
            for bj in b {
                row.push(self.pair(ai, bj)?);
            }
            rows.push(row);
        }
        Ok(Matrix::from_fn(a.len(), b.len(), |r, c| rows[r][c].clone()))
    }

    /// Moment (Hankel-type) matrix `[φ(X^{a+b})]` over monomials of degree `<= k`.
    pub fn monomial_gram(&self, k: usize) -> Result<Matrix<T>> {
        self.require_degree(2 * k)?;
        let idx = enumerate_up_to(self.d, k);
        Ok(Matrix::from_fn(idx.len(), idx.len(), |r, c| {
            self.values[&idx[r].sum(&idx[c])].clone()
        }))
    }

    /// Checks `φ(Q*Q) >= 0` on every filtration level up to degree `n`.
    pub fn check_state_positivity(&self, n: usize, tol: f64) -> Result<PositivityReport> {
        self.require_degree(2 * n)?;
        let mut levels = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let g = self.monomial_gram(k)?;
            let check = check_psd(&g, tol);
            levels.push(PositivityLevel {
                degree: k,
                size: g.rows(),
                rank: check.rank,
                min_eigenvalue: check.min_eigenvalue,
                passed: check.psd,
            });
        }
        Ok(PositivityReport {
            passed: levels.iter().all(|l| l.passed),
            levels,
        })
    }

    pub fn to_file_json(&self) -> Value {
        let moments: Vec<Value> = self
            .entries()
            .into_iter()
            .map(|(m, v)| serde_json::json!({ "m": m.exponents(), "v": v.to_json() }))
            .collect();
        serde_json::json!({
            "d": self.d,
            "max_degree": self.max_degree,
            "scalar": T::BACKEND.name(),
            "moments": moments,
        })
    }

    pub fn to_file_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file_json()).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_file_str(text: &str, origin: &str) -> Result<Self> {
        let file: MomentFile = serde_json::from_str(text).map_err(FormatError::from)?;
        let backend: Backend = file
            .scalar
            .parse()
            .map_err(|e: String| FormatError::Schema(e))?;
        let entries = file
            .moments
            .into_iter()
            .map(|e| {
                let v = match backend {
                    Backend::Exact => match &e.v {
                        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
                            return Err(FormatError::BadScalar(format!(
                                "{n} in a rational file (use \"p/q\")"
                            )))
                        }
                        v => T::from_rational(&Rational::from_json(v)?),
                    },
                    Backend::Float => T::from_f64(f64::from_json(&e.v)?),
                };
                if e.m.is_empty() {
                    return Err(FormatError::Schema("empty multi-index".into()));
                }
                Ok((MultiIndex::new(e.m), v))
            })
            .collect::<std::result::Result<Vec<_>, FormatError>>()?;
        Self::from_values(
            file.d,
            file.max_degree,
            entries,
            MomentSource::File(origin.to_string()),
        )
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_file_str(&text, &path.display().to_string())
    }
}

fn validate_atoms(atoms: &[(Vec<Rational>, Rational)], d: usize) -> Result<()> {
    if atoms.is_empty() {
        return Err(Error::EmptySamples);
    }
    if atoms.iter().any(|(p, _)| p.len() != d) {
        return Err(Error::Dimension(format!("atoms must be points of ℝ^{d}")));
    }
    if atoms.iter().any(|(_, w)| w < &Rational::zero()) {
        return Err(Error::Weights("negative atom weight".into()));
    }
    let total = atoms.iter().fold(Rational::zero(), |acc, (_, w)| acc + w);
    if !total.is_one() {
        return Err(Error::Weights(format!(
            "atom weights sum to {total}, expected 1"
        )));
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MomentFile {
    d: usize,
    max_degree: usize,
    scalar: String,
    moments: Vec<MomentEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MomentEntry {
    m: Vec<u32>,
    v: Value,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleFile {
    d: usize,
    points: Vec<Vec<Value>>,
    #[serde(default)]
    weights: Option<Vec<Value>>,
}

/// Dimension, points and optional weights of a sample file.
pub type Samples<T> = (usize, Vec<Vec<T>>, Option<Vec<T>>);

/// Reads a sample file `{"d", "points": [[..]], "weights"?: [..]}`.
pub fn load_samples<T: Scalar>(text: &str) -> Result<Samples<T>> {
    let file: SampleFile = serde_json::from_str(text).map_err(FormatError::from)?;
    let parse = |v: &Value| -> std::result::Result<T, FormatError> {
        match T::BACKEND {
            Backend::Exact => Ok(T::from_rational(&match v {
                Value::Number(n) if !(n.is_i64() || n.is_u64()) => Rational::from_float(
                    n.as_f64()
                        .ok_or_else(|| FormatError::BadScalar(n.to_string()))?,
                )
                .ok_or_else(|| FormatError::BadScalar(n.to_string()))?,
                v => Rational::from_json(v)?,
            })),
            Backend::Float => Ok(T::from_f64(f64::from_json(v)?)),
        }
    };
    let points = file
        .points
        .iter()
        .map(|p| {
            p.iter()
                .map(parse)
                .collect::<std::result::Result<Vec<_>, _>>()
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if points.iter().any(|p| p.len() != file.d) {
        return Err(Error::Dimension(format!(
            "sample points must have length {}",
            file.d
        )));
    }
    let weights = file
        .weights
        .map(|w| {
            w.iter()
                .map(parse)
                .collect::<std::result::Result<Vec<_>, _>>()
        })
        .transpose()?;
    Ok((file.d, points, weights))
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityLevel {
    pub degree: usize,
    pub size: usize,
    pub rank: usize,
    pub min_eigenvalue: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityReport {
    pub passed: bool,
    pub levels: Vec<PositivityLevel>,
}

impl PositivityReport {
    pub fn first_failure(&self) -> Option<usize> {
        self.levels.iter().find(|l| !l.passed).map(|l| l.degree)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mindex::enumerate_level;
    use proptest::prelude::*;

    type Q = Rational;
    type Mf = MomentFunctional<Q>;

    fn q(n: i64, d: i64) -> Q {
        Q::ratio(n, d)
    }

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn x(d: usize, j: usize) -> Polynomial<Q> {
        Polynomial::coordinate(d, j)
    }

    fn rademacher_atoms() -> CatalogMeasure {
        CatalogMeasure::Atoms(vec![(vec![q(-1, 1)], q(1, 2)), (vec![q(1, 1)], q(1, 2))])
    }

    #[test]
    fn gaussian_moments_follow_double_factorial_recursion() {
        let phi = Mf::from_catalog(&CatalogMeasure::GaussianProduct, 1, 12).unwrap();
        // m_k = (k-1) m_{k-2}
        let mut expect = q(1, 1);
        for k in (2..=12).step_by(2) {
            expect *= Q::from_i64(k as i64 - 1);
            assert_eq!(phi.moment(&mi(&[k])).unwrap(), &expect);
        }
        assert_eq!(phi.moment(&mi(&[4])).unwrap(), &q(3, 1));
        assert_eq!(phi.moment(&mi(&[6])).unwrap(), &q(15, 1));
        assert_eq!(phi.moment(&mi(&[5])).unwrap(), &q(0, 1));
    }

    #[test]
    fn rademacher_and_two_atoms_agree() {
        let r = Mf::from_catalog(&CatalogMeasure::RademacherProduct, 1, 8).unwrap();
        let a = Mf::from_catalog(&rademacher_atoms(), 1, 8).unwrap();
        for k in 0..=8u32 {
            let m = mi(&[k]);
            assert_eq!(r.moment(&m).unwrap(), a.moment(&m).unwrap());
            assert_eq!(r.moment(&m).unwrap(), &q(((k + 1) % 2) as i64, 1));
        }
    }

    #[test]
    fn catalog_errors() {
        assert!(matches!(
            Mf::from_catalog(&CatalogMeasure::CircleUniform, 3, 4),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            CatalogMeasure::parse("cauchy", vec![]),
            Err(Error::UnknownMeasure(_))
        ));
        let bad = CatalogMeasure::Atoms(vec![(vec![q(0, 1)], q(1, 2))]);
        assert!(matches!(
            Mf::from_catalog(&bad, 1, 2),
            Err(Error::Weights(_))
        ));
    }

    #[test]
    fn circle_moment_values() {
        assert_eq!(circle_moment(2, 0), q(1, 2));
        assert_eq!(circle_moment(4, 0), q(3, 8));
        assert_eq!(circle_moment(2, 2), q(1, 8));
        assert_eq!(circle_moment(3, 1), q(0, 1));
        assert_eq!(circle_moment(0, 0), q(1, 1));
    }

    #[test]
    fn file_examples() {
        let ok = r#"{"d":1,"max_degree":2,"scalar":"rational","moments":[
            {"m":[0],"v":"1/1"},{"m":[1],"v":"0/1"},{"m":[2],"v":"1/1"}]}"#;
        let phi = Mf::from_file_str(ok, "t").unwrap();
        assert_eq!(phi.max_degree(), 2);

        let unnormalized = r#"{"d":1,"max_degree":1,"scalar":"rational","moments":[
            {"m":[0],"v":"2/1"},{"m":[1],"v":"0/1"}]}"#;
        assert!(matches!(
            Mf::from_file_str(unnormalized, "t"),
            Err(Error::Normalization(_))
        ));

        let missing = r#"{"d":2,"max_degree":2,"scalar":"rational","moments":[
            {"m":[0,0],"v":"1"},{"m":[0,1],"v":"0"},
            {"m":[2,0],"v":"1"},{"m":[1,1],"v":"0"},{"m":[0,2],"v":"1"}]}"#;
        assert!(matches!(
            Mf::from_file_str(missing, "t"),
            Err(Error::MissingMoment(m)) if m == vec![1, 0]
        ));

        let unknown_key = r#"{"d":1,"max_degree":0,"scalar":"rational","extra":1,
            "moments":[{"m":[0],"v":"1"}]}"#;
        assert!(matches!(
            Mf::from_file_str(unknown_key, "t"),
            Err(Error::Format(_))
        ));

        let float_in_rational = r#"{"d":1,"max_degree":0,"scalar":"rational",
            "moments":[{"m":[0],"v":1.5}]}"#;
        assert!(Mf::from_file_str(float_in_rational, "t").is_err());
    }

    #[test]
    fn file_round_trip_is_bit_exact() {
        let phi = Mf::from_catalog(&CatalogMeasure::UniformBox, 2, 4).unwrap();
        let s = phi.to_file_string();
        let back = Mf::from_file_str(&s, "t").unwrap();
        assert_eq!(back.to_file_string(), s);
        let f = MomentFunctional::<f64>::from_catalog(&CatalogMeasure::UniformBox, 2, 4).unwrap();
        let fs = f.to_file_string();
        let fback = MomentFunctional::<f64>::from_file_str(&fs, "t").unwrap();
        assert_eq!(fback.to_file_string(), fs);
    }

    #[test]
    fn samples_examples() {
        let pts = vec![vec![q(-1, 1)], vec![q(1, 1)]];
        let s = Mf::from_samples(&pts, None, 6).unwrap();
        let r = Mf::from_catalog(&CatalogMeasure::RademacherProduct, 1, 6).unwrap();
        assert_eq!(s.entries(), r.entries());

        let dirac = Mf::from_samples(&[vec![q(0, 1), q(0, 1)]], None, 4).unwrap();
        for (m, v) in dirac.entries() {
            let expect = if m.degree() == 0 { q(1, 1) } else { q(0, 1) };
            assert_eq!(v, expect);
        }
        assert!(matches!(
            Mf::from_samples(&[], None, 2),
            Err(Error::EmptySamples)
        ));
    }

    #[test]
    fn weighted_rational_samples_reproduce_atoms() {
        let atoms = vec![
            (vec![q(0, 1), q(1, 2)], q(1, 3)),
            (vec![q(2, 1), q(-1, 1)], q(1, 6)),
            (vec![q(-3, 2), q(1, 1)], q(1, 2)),
        ];
        let pts: Vec<_> = atoms.iter().map(|a| a.0.clone()).collect();
        let ws: Vec<_> = atoms.iter().map(|a| a.1.clone()).collect();
        let s = Mf::from_samples(&pts, Some(&ws), 5).unwrap();
        let a = Mf::from_catalog(&CatalogMeasure::Atoms(atoms), 2, 5).unwrap();
        assert_eq!(s.entries(), a.entries());
        assert!(matches!(
            Mf::from_samples(&pts, Some(&ws[..2]), 5),
            Err(Error::Weights(_))
        ));
    }

    #[test]
    fn monte_carlo_second_moment_within_three_sigma() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![StandardNormal.sample(&mut rng)])
            .collect();
        let phi = MomentFunctional::<f64>::from_samples(&pts, None, 4).unwrap();
        // Var(x²) = m_4 - m_2² = 2
        let sigma = (2.0f64 / n as f64).sqrt();
        let m2 = *phi.moment(&mi(&[2])).unwrap();
        assert!((m2 - 1.0).abs() < 3.0 * sigma, "m2 = {m2}");
    }

    #[test]
    fn apply_examples() {
        let g = Mf::from_catalog(&CatalogMeasure::GaussianProduct, 1, 6).unwrap();
        let he2 = &Polynomial::monomial(mi(&[2])) - &Polynomial::one(1);
        assert_eq!(g.apply(&he2).unwrap(), q(0, 1));
        assert_eq!(g.apply(&Polynomial::one(1)).unwrap(), q(1, 1));
        let r = Mf::from_catalog(&CatalogMeasure::RademacherProduct, 1, 6).unwrap();
        assert_eq!(r.apply(&Polynomial::monomial(mi(&[3]))).unwrap(), q(0, 1));
        assert!(matches!(
            r.apply(&Polynomial::monomial(mi(&[7]))),
            Err(Error::InsufficientMoments {
                needed: 7,
                available: 6
            })
        ));
    }

    #[test]
    fn gram_examples() {
        let g = Mf::from_catalog(&CatalogMeasure::GaussianProduct, 1, 4).unwrap();
        let basis: Vec<_> = (0..3).map(|k| Polynomial::monomial(mi(&[k]))).collect();
        let gm = g.gram(&basis, &basis).unwrap();
        let expect = Matrix::from_rows(vec![
            vec![q(1, 1), q(0, 1), q(1, 1)],
            vec![q(0, 1), q(1, 1), q(0, 1)],
            vec![q(1, 1), q(0, 1), q(3, 1)],
        ]);
        assert_eq!(gm, expect);
        let one = [Polynomial::one(1)];
        assert_eq!(g.gram(&one, &one).unwrap(), Matrix::identity(1));
        let r = Mf::from_catalog(&CatalogMeasure::RademacherProduct, 1, 4).unwrap();
        let p = [&Polynomial::monomial(mi(&[2])) - &Polynomial::one(1)];
        assert_eq!(r.gram(&p, &p).unwrap(), Matrix::zeros(1, 1));
        let too_high = [Polynomial::monomial(mi(&[3]))];
        assert!(g.gram(&too_high, &too_high).is_err());
    }

    #[test]
    fn positivity_examples() {
        let g = Mf::from_catalog(&CatalogMeasure::GaussianProduct, 2, 6).unwrap();
        assert!(g.check_state_positivity(3, 0.0).unwrap().passed);

        let bad = Mf::from_values(
            1,
            2,
            [
                (mi(&[0]), q(1, 1)),
                (mi(&[1]), q(0, 1)),
                (mi(&[2]), q(-1, 1)),
            ],
            MomentSource::Explicit,
        )
        .unwrap();
        let rep = bad.check_state_positivity(1, 0.0).unwrap();
        assert!(!rep.passed);
        assert_eq!(rep.first_failure(), Some(1));

        let dirac = Mf::from_samples(&[vec![q(0, 1)]], None, 4).unwrap();
        let rep = dirac.check_state_positivity(2, 0.0).unwrap();
        assert!(rep.passed);
        assert!(rep.levels.iter().all(|l| l.rank == 1));

        let fl =
            MomentFunctional::<f64>::from_catalog(&CatalogMeasure::CircleUniform, 2, 6).unwrap();
        let rep = fl.check_state_positivity(3, 1e-10).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.levels[2].rank, 5);
    }

    // Independent numeric integration of each catalog formula.
    fn integrate(a: f64, b: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
        let rule = gauss_quad::GaussLegendre::new(20).unwrap();
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|i| {
                let lo = a + i as f64 * h;
                rule.integrate(lo, lo + h, &f)
            })
            .sum()
    }

    fn rel_close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1.0)
    }

    #[test]
    fn catalog_formulas_match_numeric_integration() {
        let sqrt2pi = (2.0 * std::f64::consts::PI).sqrt();
        for k in 0..=12u32 {
            let kf = k as i32;
            let gauss = integrate(-40.0, 40.0, 400, |x| {
                x.powi(kf) * (-x * x / 2.0).exp() / sqrt2pi
            });
            assert!(
                rel_close(gauss, gaussian_moment(k).to_f64()),
                "gaussian {k}: {gauss}"
            );
            let unif = integrate(-1.0, 1.0, 8, |x| x.powi(kf) / 2.0);
            assert!(rel_close(unif, uniform_moment(k).to_f64()), "uniform {k}");
            let expo = integrate(0.0, 200.0, 2000, |x| x.powi(kf) * (-x).exp());
            assert!(
                rel_close(expo, exponential_moment(k).to_f64()),
                "exponential {k}: {expo}"
            );
        }
        // periodic trapezoid rule is exact for trigonometric polynomials of low degree
        let n = 256;
        for a in 0..=8u32 {
            for b in 0..=8u32 {
                let s: f64 = (0..n)
                    .map(|i| {
                        let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                        t.cos().powi(a as i32) * t.sin().powi(b as i32)
                    })
                    .sum::<f64>()
                    / n as f64;
                assert!(
                    (s - circle_moment(a, b).to_f64()).abs() < 1e-12,
                    "circle {a},{b}: {s}"
                );
            }
        }
    }

    fn arb_poly(d: usize, deg: u32) -> impl Strategy<Value = Polynomial<Q>> {
        proptest::collection::vec((proptest::collection::vec(0..=deg, d), -4i64..=4), 0..5)
            .prop_map(move |ts| {
                Polynomial::from_terms(
                    d,
                    ts.into_iter()
                        .filter(|(m, _)| m.iter().sum::<u32>() <= deg)
                        .map(|(m, c)| (MultiIndex::new(m), q(c, 1))),
                )
            })
    }

    proptest! {
        #[test]
        fn apply_is_linear(a in arb_poly(2, 3), b in arb_poly(2, 3), s in -5i64..5) {
            let phi = Mf::from_catalog(&CatalogMeasure::ExponentialProduct, 2, 6).unwrap();
            let sq = q(s, 1);
            let comb = &a.scale(&sq) + &b;
            prop_assert_eq!(
                phi.apply(&comb).unwrap(),
                sq * phi.apply(&a).unwrap() + phi.apply(&b).unwrap()
            );
        }

        #[test]
        fn coordinates_are_symmetric(a in arb_poly(2, 2), b in arb_poly(2, 2), j in 0usize..2) {
            let phi = Mf::from_catalog(&CatalogMeasure::UniformBox, 2, 6).unwrap();
            let xj = x(2, j);
            prop_assert_eq!(
                phi.pair(&(&xj * &a), &b).unwrap(),
                phi.pair(&a, &(&xj * &b)).unwrap()
            );
        }

        #[test]
        fn gram_of_a_family_is_psd(a in arb_poly(2, 2), b in arb_poly(2, 2), c in arb_poly(2, 2)) {
            let phi = Mf::from_catalog(&CatalogMeasure::CircleUniform, 2, 4).unwrap();
            let fam = vec![a, b, c];
            let g = phi.gram(&fam, &fam).unwrap();
            prop_assert!(g.is_symmetric_within(0.0));
            prop_assert!(check_psd(&g, 0.0).psd);
        }
    }

    #[test]
    fn level_enumeration_is_consistent_with_storage() {
        let phi = Mf::from_catalog(&CatalogMeasure::UniformBox, 3, 3).unwrap();
        let n: usize = (0..=3).map(|k| enumerate_level(3, k).len()).sum();
        assert_eq!(phi.entries().len(), n);
    }
}
