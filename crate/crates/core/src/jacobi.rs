//! Favard data `(Ω_n, α_{j|n})` transported to the symmetric tensor powers.
//!
//! `U_n` sends the tensor basis vector `ê_m` to the creation word
//! `a⁺_{j_n} ⋯ a⁺_{j_1} 1` with occupation numbers `m`. The Gram matrix of the
//! images, `Gω_n = U_nᵀ G_n U_n`, is the level pre-scalar product on
//! `(ℂ^d)^⊗̂n`; with the tensor metric `T_n` it corresponds to the operator
//! `Ω_n = T_n⁻¹ Gω_n`. Files store `Gω_n`, which stays exactly rational
//! without committing to a normalization of `Ω_n`.
//!
//! Coordinates are 0-based in memory and 1-based in files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cap::{
    extract_cap, verify_adjointness, verify_commutators, verify_jacobi_relation, CapOperators,
};
use crate::error::{Error, FormatError, Result};
use crate::gradation::{GradationSummary, GradedBasis};
use crate::linalg::{check_psd, pseudo_inverse, Matrix, PsdPseudoInverse};
use crate::mindex::{creation_shift, enumerate_level, level_dimension, tensor_metric};
use crate::moments::MomentFunctional;
use crate::report::{scaled, CheckReport};
use crate::scalar::{Backend, Scalar};

pub const ORDER: &str = "graded-lex";
pub const METRIC: &str = "m!/n!";

#[derive(Debug, Clone)]
pub struct JacobiLevel<T: Scalar> {
    pub n: usize,
    pub gomega: Matrix<T>,
    /// `alpha[j]`, one per coordinate.
    pub alpha: Vec<Matrix<T>>,
    /// `U_n` in coordinates (level-`n` monic basis ← `ê` basis), when known.
    pub umat: Option<Matrix<T>>,
}

#[derive(Debug, Clone)]
pub struct JacobiSequence<T: Scalar> {
    d: usize,
    levels: Vec<JacobiLevel<T>>,
}

impl<T: Scalar> JacobiSequence<T> {
    /// Assembles a sequence from `(Gω_n, [α_{j|n}])` pairs, checking shapes only.
    pub fn new(d: usize, levels: Vec<(Matrix<T>, Vec<Matrix<T>>)>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Dimension("d must be at least 1".into()));
        }
        if levels.is_empty() {
            return Err(Error::Inconsistent(
                "a Jacobi sequence needs level 0".into(),
            ));
        }
        let levels = levels
            .into_iter()
            .enumerate()
            .map(|(n, (gomega, alpha))| {
                let dn = level_dimension(d, n);
                if gomega.rows() != dn || gomega.cols() != dn {
                    return Err(Error::Dimension(format!("Gω_{n} must be {dn}×{dn}")));
                }
                if alpha.len() != d {
                    return Err(Error::Dimension(format!("level {n} needs {d} α matrices")));
                }
                if alpha.iter().any(|a| a.rows() != dn || a.cols() != dn) {
                    return Err(Error::Dimension(format!(
                        "α matrices of level {n} must be {dn}×{dn}"
                    )));
                }
                Ok(JacobiLevel {
                    n,
                    gomega,
                    alpha,
                    umat: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { d, levels })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn top(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, n: usize) -> &JacobiLevel<T> {
        &self.levels[n]
    }

    pub fn levels(&self) -> &[JacobiLevel<T>] {
        &self.levels
    }

    pub fn gomega(&self, n: usize) -> &Matrix<T> {
        &self.levels[n].gomega
    }

    pub fn alpha(&self, j: usize, n: usize) -> &Matrix<T> {
        &self.levels[n].alpha[j]
    }

    /// `Ω_n = T_n⁻¹ Gω_n`.
    pub fn omega(&self, n: usize) -> Matrix<T> {
        let metric = tensor_metric(self.d, n).metric;
        let g = &self.levels[n].gomega;
        Matrix::from_fn(g.rows(), g.cols(), |r, c| {
            g[(r, c)].clone() / T::from_rational(&metric[r])
        })
    }

    pub fn to_file_json(&self) -> Value {
        let rows = |m: &Matrix<T>| -> Vec<Vec<Value>> {
            m.to_rows()
                .iter()
                .map(|r| r.iter().map(Scalar::to_json).collect())
                .collect()
        };
        let file = JacobiFile {
            d: self.d,
            top: self.top(),
            order: ORDER.into(),
            metric: METRIC.into(),
            levels: self
                .levels
                .iter()
                .map(|l| LevelFile {
                    n: l.n,
                    gomega: rows(&l.gomega),
                    alpha: l
                        .alpha
                        .iter()
                        .enumerate()
                        .map(|(j, a)| ((j + 1).to_string(), rows(a)))
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_value(file).expect("serializable")
    }

    pub fn to_file_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file_json()).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_file_str(text: &str) -> Result<Self> {
        let file: JacobiFile = serde_json::from_str(text).map_err(FormatError::from)?;
        let schema = |msg: String| Error::Format(FormatError::Schema(msg));
        if file.order != ORDER {
            return Err(schema(format!(
                "unsupported order `{}` (expected `{ORDER}`)",
                file.order
            )));
        }
        if file.metric != METRIC {
            return Err(schema(format!(
                "unsupported metric `{}` (expected `{METRIC}`)",
                file.metric
            )));
        }
        if file.levels.len() != file.top + 1 {
            return Err(schema(format!(
                "N = {} needs {} levels, found {}",
                file.top,
                file.top + 1,
                file.levels.len()
            )));
        }
        if file.d == 0 {
            return Err(schema("d must be at least 1".into()));
        }
        let matrix = |rows: &[Vec<Value>], what: &str, dn: usize| -> Result<Matrix<T>> {
            if rows.len() != dn || rows.iter().any(|r| r.len() != dn) {
                return Err(schema(format!("{what} must be {dn}×{dn}")));
            }
            let parsed = rows
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|v| T::from_json(v))
                        .collect::<std::result::Result<Vec<_>, _>>()
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            Ok(Matrix::from_rows(parsed))
        };
        let mut levels = Vec::with_capacity(file.levels.len());
        for (n, level) in file.levels.iter().enumerate() {
            if level.n != n {
                return Err(schema(format!("level {n} is labelled n = {}", level.n)));
            }
            let dn = level_dimension(file.d, n);
            let gomega = matrix(&level.gomega, &format!("Gomega of level {n}"), dn)?;
            let expected: Vec<String> = (1..=file.d).map(|j| j.to_string()).collect();
            let mut keys: Vec<&String> = level.alpha.keys().collect();
            keys.sort_by_key(|k| k.parse::<usize>().unwrap_or(usize::MAX));
            if keys
                .iter()
                .map(|k| k.as_str())
                .ne(expected.iter().map(String::as_str))
            {
                return Err(schema(format!(
                    "alpha of level {n} must have keys \"1\"..\"{}\"",
                    file.d
                )));
            }
            let alpha = expected
                .iter()
                .map(|k| matrix(&level.alpha[k], &format!("alpha[{k}] of level {n}"), dn))
                .collect::<Result<Vec<_>>>()?;
            levels.push((gomega, alpha));
        }
        Self::new(file.d, levels)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_file_str(&text)
    }
}

/// Backend a Jacobi file asks for: float as soon as one entry is a
/// non-integer JSON number, rational otherwise.
pub fn detect_backend(text: &str) -> Result<Backend> {
    fn has_float(v: &Value) -> bool {
        match v {
            Value::Number(n) => !(n.is_i64() || n.is_u64()),
            Value::Array(a) => a.iter().any(has_float),
            Value::Object(o) => o.values().any(has_float),
            _ => false,
        }
    }
    let v: Value = serde_json::from_str(text).map_err(FormatError::from)?;
    Ok(if has_float(&v) {
        Backend::Float
    } else {
        Backend::Exact
    })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JacobiFile {
    d: usize,
    #[serde(rename = "N")]
    top: usize,
    order: String,
    metric: String,
    levels: Vec<LevelFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelFile {
    n: usize,
    #[serde(rename = "Gomega")]
    gomega: Vec<Vec<Value>>,
    alpha: BTreeMap<String, Vec<Vec<Value>>>,
}

/// Coefficients of `a⁺_{w_k} ⋯ a⁺_{w_1} 1` in the monic basis of level `k`;
/// `word[0]` is applied first.
pub fn creation_word_image<T: Scalar>(cap: &CapOperators<T>, word: &[usize]) -> Vec<T> {
    let mut v = vec![T::one()];
    for (n, &j) in word.iter().enumerate() {
        v = cap.aplus(j, n).matvec(&v);
    }
    v
}

/// `U_n`, with columns in `enumerate_level` order, built from the
/// nondecreasing word of each occupation vector.
pub fn build_u<T: Scalar>(cap: &CapOperators<T>, n: usize) -> Matrix<T> {
    assert!(n <= cap.top(), "U_{n} needs creators up to level {n}");
    let indices = enumerate_level(cap.dim(), n);
    let cols: Vec<Vec<T>> = indices
        .iter()
        .map(|m| creation_word_image(cap, &m.canonical_word()))
        .collect();
    Matrix::from_columns(indices.len(), &cols)
}

/// All distinct orderings of a word.
pub fn distinct_permutations(word: &[usize]) -> Vec<Vec<usize>> {
    fn go(
        counts: &mut BTreeMap<usize, usize>,
        cur: &mut Vec<usize>,
        len: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        let keys: Vec<usize> = counts
            .iter()
            .filter(|(_, &c)| c > 0)
            .map(|(&k, _)| k)
            .collect();
        for k in keys {
            *counts.get_mut(&k).expect("present") -= 1;
            cur.push(k);
            go(counts, cur, len, out);
            cur.pop();
            *counts.get_mut(&k).expect("present") += 1;
        }
    }
    let mut counts = BTreeMap::new();
    for &j in word {
        *counts.entry(j).or_insert(0) += 1;
    }
    let mut out = Vec::new();
    go(
        &mut counts,
        &mut Vec::with_capacity(word.len()),
        word.len(),
        &mut out,
    );
    out
}

/// Every ordering of every occupation word up to level `top` must produce the
/// same `U_n` column.
pub fn verify_word_order<T: Scalar>(cap: &CapOperators<T>, tol: f64) -> CheckReport {
    let mut report = CheckReport::new("word_order");
    for n in 0..=cap.top() {
        for m in enumerate_level(cap.dim(), n) {
            let reference = creation_word_image(cap, &m.canonical_word());
            let magnitude = reference
                .iter()
                .map(|x| x.to_f64().abs())
                .fold(0.0, f64::max);
            for word in distinct_permutations(&m.canonical_word()) {
                let image = creation_word_image(cap, &word);
                let diff = image
                    .iter()
                    .zip(&reference)
                    .map(|(a, b)| a.clone() - b)
                    .collect::<Vec<_>>();
                let deviation = diff.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max);
                let ok = diff.iter().all(|x| x.is_negligible(scaled(tol, magnitude)));
                report.record(n, deviation, ok, || {
                    let w: Vec<usize> = word.iter().map(|j| j + 1).collect();
                    format!("creation word {w:?} differs from its sorted order")
                });
            }
        }
    }
    report
}

/// `Gω_n = U_nᵀ G_n U_n` and `α_{j|n} = U_n⁺ A⁰_{j|n} U_n`, the latter
/// restricted to the complement of `ker Gω_n` (extended by 0 on it).
pub fn extract_jacobi<T: Scalar>(
    gb: &GradedBasis<T>,
    cap: &CapOperators<T>,
) -> Result<JacobiSequence<T>> {
    if gb.top() != cap.top() || gb.dim() != cap.dim() {
        return Err(Error::Inconsistent(format!(
            "gradation (d={}, N={}) and CAP operators (d={}, N={}) disagree",
            gb.dim(),
            gb.top(),
            cap.dim(),
            cap.top()
        )));
    }
    let tol = gb.tol();
    let mut levels = Vec::with_capacity(gb.top() + 1);
    for n in 0..=gb.top() {
        let u = build_u(cap, n);
        let mut gomega = u.transpose().matmul(&gb.level(n).gram).matmul(&u);
        gomega.symmetrize();
        let range = PsdPseudoInverse::new(&gomega, tol).projector;
        let u_inv = pseudo_inverse(&u, tol);
        let alpha = (0..cap.dim())
            .map(|j| u_inv.matmul(cap.azero(j, n)).matmul(&u).matmul(&range))
            .collect();
        levels.push(JacobiLevel {
            n,
            gomega,
            alpha,
            umat: Some(u),
        });
    }
    Ok(JacobiSequence {
        d: gb.dim(),
        levels,
    })
}

pub const NORMALIZATION: &str = "normalization";
pub const SYMMETRY: &str = "symmetry";
pub const POSITIVITY: &str = "positivity";
pub const ALPHA_SYMMETRY: &str = "alpha_symmetry";
pub const COMPATIBILITY: &str = "compatibility";
pub const UNITARITY: &str = "unitarity";

/// One report per Favard condition.
#[derive(Debug, Clone, Serialize)]
pub struct FavardReport {
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

impl FavardReport {
    /// First failing condition (in check order) and its lowest failing level.
    pub fn first_failure(&self) -> Option<(&'static str, usize)> {
        let names = [
            NORMALIZATION,
            SYMMETRY,
            POSITIVITY,
            ALPHA_SYMMETRY,
            COMPATIBILITY,
            UNITARITY,
        ];
        self.checks.iter().find_map(|c| {
            let level = c.first_failing_level()?;
            let name = names
                .into_iter()
                .find(|n| *n == c.name)
                .expect("known condition");
            Some((name, level))
        })
    }

    pub fn check(&self, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn into_result(self) -> Result<Self> {
        match self.first_failure() {
            Some((condition, level)) => Err(Error::FavardViolation { condition, level }),
            None => Ok(self),
        }
    }
}

/// Normalization `Gω_0 = [1]`, symmetry and positivity of every `Gω_n`,
/// `Gω`-symmetry of every `α_{j|n}`, and the kernel lift
/// `Gω_n x = 0 ⟹ Gω_{n+1} (e_j ⊗̂ x) = 0`. When `gb` is given and the levels
/// carry `U_n`, also `Gω_n = U_nᵀ G_n U_n`.
pub fn verify_favard_conditions<T: Scalar>(
    js: &JacobiSequence<T>,
    gb: Option<&GradedBasis<T>>,
    tol: f64,
) -> FavardReport {
    let d = js.dim();
    let mut normalization = CheckReport::new(NORMALIZATION);
    let mut symmetry = CheckReport::new(SYMMETRY);
    let mut positivity = CheckReport::new(POSITIVITY);
    let mut alpha_symmetry = CheckReport::new(ALPHA_SYMMETRY);
    let mut compatibility = CheckReport::new(COMPATIBILITY);
    let mut unitarity = CheckReport::new(UNITARITY);

    let g0 = js.gomega(0);
    let dev = (g0[(0, 0)].to_f64() - 1.0).abs();
    let ok = (g0[(0, 0)].clone() - T::one()).is_negligible(tol);
    normalization.record(0, dev, ok, || {
        format!("Gω_0 = [{}], expected [1]", g0[(0, 0)])
    });

    let kernels: Vec<Vec<Vec<T>>> = js
        .levels()
        .iter()
        .map(|l| PsdPseudoInverse::new(&l.gomega, tol).kernel)
        .collect();
    for level in js.levels() {
        let n = level.n;
        let g = &level.gomega;
        let mag = g.max_abs();
        let asym = g.sub(&g.transpose());
        symmetry.record(
            n,
            asym.max_abs(),
            asym.is_zero_within(scaled(tol, mag)),
            || format!("Gω_{n} is not symmetric"),
        );
        let psd = check_psd(g, tol);
        positivity.record(n, (-psd.min_eigenvalue).max(0.0), psd.psd, || {
            format!(
                "Gω_{n} is not positive semidefinite (min eigenvalue {:e})",
                psd.min_eigenvalue
            )
        });
        for (j, a) in level.alpha.iter().enumerate() {
            let lhs = g.matmul(a);
            let diff = lhs.sub(&a.transpose().matmul(g));
            let ok = diff.is_zero_within(scaled(tol, lhs.max_abs()));
            alpha_symmetry.record(n, diff.max_abs(), ok, || {
                format!("α_{{{}|{n}}} is not Gω_{n}-symmetric", j + 1)
            });
        }
        if n < js.top() {
            let next = js.gomega(n + 1);
            for j in 0..d {
                let shift = creation_shift::<T>(d, n, j);
                for x in &kernels[n] {
                    let image = next.matvec(&shift.matvec(x));
                    let xmag = x.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max);
                    let dev = image.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max);
                    let ok = image
                        .iter()
                        .all(|v| v.is_negligible(scaled(tol, next.max_abs() * xmag)));
                    compatibility.record(n, dev, ok, || {
                        format!(
                            "a zero-norm vector of level {n} does not lift to level {} along e_{}",
                            n + 1,
                            j + 1
                        )
                    });
                }
            }
        }
        if let (Some(gb), Some(u)) = (gb, &level.umat) {
            let transported = u.transpose().matmul(&gb.level(n).gram).matmul(u);
            let diff = transported.sub(g);
            let ok = diff.is_zero_within(scaled(tol, mag));
            unitarity.record(n, diff.max_abs(), ok, || {
                format!("Gω_{n} differs from U_nᵀ G_n U_n")
            });
        }
    }
    let checks = vec![
        normalization,
        symmetry,
        positivity,
        alpha_symmetry,
        compatibility,
        unitarity,
    ];
    FavardReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

/// Everything the forward direction produces for one functional.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureAnalysis {
    pub source: String,
    pub d: usize,
    #[serde(rename = "N")]
    pub top: usize,
    pub backend: &'static str,
    pub tol: f64,
    pub gradation: GradationSummary,
    pub reports: Vec<CheckReport>,
    pub favard: FavardReport,
    pub passed: bool,
}

impl MeasureAnalysis {
    /// Name and level of the first failing check.
    pub fn first_failure(&self) -> Option<(String, usize)> {
        self.reports
            .iter()
            .find_map(|r| r.first_failing_level().map(|n| (r.name.clone(), n)))
            .or_else(|| {
                self.favard
                    .first_failure()
                    .map(|(c, n)| (format!("favard.{c}"), n))
            })
    }
}

pub struct Decomposition<T: Scalar> {
    pub gradation: GradedBasis<T>,
    pub cap: CapOperators<T>,
    pub jacobi: JacobiSequence<T>,
    pub analysis: MeasureAnalysis,
}

/// Gradation, CAP extraction and transport to tensor coordinates, with every
/// verification run along the way.
pub fn decompose<T: Scalar>(
    phi: &MomentFunctional<T>,
    top: usize,
    tol: f64,
) -> Result<Decomposition<T>> {
    phi.require_degree(2 * top + 1)?;
    let gradation = GradedBasis::build(phi, top, tol)?;
    let cap = extract_cap(&gradation, phi)?;
    let jacobi = extract_jacobi(&gradation, &cap)?;
    let reports = vec![
        verify_jacobi_relation(&cap, &gradation, phi, tol)?,
        verify_adjointness(&cap, tol),
        verify_commutators(&cap, tol),
        verify_word_order(&cap, tol),
    ];
    let favard = verify_favard_conditions(&jacobi, Some(&gradation), tol);
    let passed = reports.iter().all(|r| r.passed) && favard.passed;
    let analysis = MeasureAnalysis {
        source: phi.source().to_string(),
        d: phi.dim(),
        top,
        backend: T::BACKEND.name(),
        tol,
        gradation: gradation.summary(),
        reports,
        favard,
        passed,
    };
    Ok(Decomposition {
        gradation,
        cap,
        jacobi,
        analysis,
    })
}
