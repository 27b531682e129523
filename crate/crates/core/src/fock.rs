//! Reconstruction: the symmetric interacting Fock space of a Jacobi sequence.
//!
//! Level `n` is `(ℂ^d)^⊗̂n` in the `ê_m` basis with pre-scalar product `Gω_n`.
//! The creator is the index shift `ê_m ↦ ê_{m+e_j}`; the annihilator is its
//! `Gω`-adjoint, i.e. any solution of `Gω_{n−1} A⁻ = A⁺ᵀ Gω_n`. That system
//! is solvable exactly when zero-norm vectors of level `n−1` lift to zero-norm
//! vectors of level `n`, so a failed compatibility condition surfaces as an
//! inconsistent adjoint. Moments are vacuum expectations
//! `⟨Φ, X_{w_1} ⋯ X_{w_k} Φ⟩` with `X_j = A⁺_j + α_j + A⁻_j`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jacobi::{decompose, verify_favard_conditions, JacobiSequence, COMPATIBILITY};
use crate::linalg::{particular_solution, Matrix, PsdPseudoInverse};
use crate::mindex::{creation_shift, MultiIndex};
use crate::moments::{MomentFunctional, MomentSource};
use crate::report::{scaled, CheckReport};
use crate::scalar::Scalar;

/// How the annihilator is picked among the solutions of its adjoint relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdjointSolver {
    /// Pseudo-inverse solution, orthogonal to `ker Gω_{n−1}`.
    #[default]
    LeastNorm,
    /// Row-reduction solution with free variables set to zero.
    Particular,
}

#[derive(Debug, Clone)]
pub struct FockSpace<T: Scalar> {
    d: usize,
    gomega: Vec<Matrix<T>>,
}

impl<T: Scalar> FockSpace<T> {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn top(&self) -> usize {
        self.gomega.len() - 1
    }

    pub fn gomega(&self, n: usize) -> &Matrix<T> {
        &self.gomega[n]
    }

    /// The vacuum `Φ` as a level-0 coefficient vector.
    pub fn vacuum(&self) -> Vec<T> {
        vec![T::one()]
    }

    /// Longest word whose vacuum expectation the built levels determine:
    /// a closed path of length `2N+1` peaks at level `N`.
    pub fn max_word_len(&self) -> usize {
        2 * self.top() + 1
    }
}

#[derive(Debug, Clone)]
pub struct FieldOperators<T: Scalar> {
    /// `aplus[j][n]`: `d_{n+1} × d_n`, for `n < N`.
    aplus: Vec<Vec<Matrix<T>>>,
    /// `aminus[j][n]`: `d_{n−1} × d_n`; level 0 is `0 × 1`.
    aminus: Vec<Vec<Matrix<T>>>,
    alpha: Vec<Vec<Matrix<T>>>,
}

impl<T: Scalar> FieldOperators<T> {
    pub fn aplus(&self, j: usize, n: usize) -> &Matrix<T> {
        &self.aplus[j][n]
    }

    pub fn aminus(&self, j: usize, n: usize) -> &Matrix<T> {
        &self.aminus[j][n]
    }

    pub fn alpha(&self, j: usize, n: usize) -> &Matrix<T> {
        &self.alpha[j][n]
    }
}

pub fn build_fock<T: Scalar>(
    js: &JacobiSequence<T>,
    tol: f64,
) -> Result<(FockSpace<T>, FieldOperators<T>)> {
    build_fock_with(js, tol, AdjointSolver::LeastNorm)
}

/// Refuses sequences that fail normalization, symmetry, positivity or
/// α-symmetry; a failed kernel lift is reported as the inconsistent adjoint it
/// causes.
pub fn build_fock_with<T: Scalar>(
    js: &JacobiSequence<T>,
    tol: f64,
    solver: AdjointSolver,
) -> Result<(FockSpace<T>, FieldOperators<T>)> {
    let report = verify_favard_conditions(js, None, tol);
    for check in report.checks.iter().filter(|c| c.name != COMPATIBILITY) {
        if let Some(level) = check.first_failing_level() {
            return Err(Error::FavardViolation {
                condition: favard_name(&check.name),
                level,
            });
        }
    }
    let d = js.dim();
    let top = js.top();
    let gomega: Vec<Matrix<T>> = js.levels().iter().map(|l| l.gomega.clone()).collect();
    let pinvs: Vec<PsdPseudoInverse<T>> = gomega
        .iter()
        .map(|g| PsdPseudoInverse::new(g, tol))
        .collect();
    let mut aplus = vec![Vec::with_capacity(top); d];
    let mut aminus = vec![Vec::with_capacity(top + 1); d];
    for j in 0..d {
        aminus[j].push(Matrix::zeros(0, 1));
        for n in 0..top {
            aplus[j].push(creation_shift::<T>(d, n, j));
        }
        for n in 1..=top {
            let rhs = aplus[j][n - 1].transpose().matmul(&gomega[n]);
            let mut cols = Vec::with_capacity(rhs.cols());
            for c in 0..rhs.cols() {
                let b = rhs.column(c);
                let x = match solver {
                    AdjointSolver::LeastNorm => pinvs[n - 1].solve_consistent(&b, tol),
                    AdjointSolver::Particular => particular_solution(&gomega[n - 1], &b, tol),
                };
                cols.push(x.ok_or(Error::InconsistentAdjoint {
                    level: n,
                    coordinate: j + 1,
                })?);
            }
            aminus[j].push(Matrix::from_columns(rhs.rows(), &cols));
        }
    }
    let alpha = (0..d)
        .map(|j| (0..=top).map(|n| js.alpha(j, n).clone()).collect())
        .collect();
    Ok((
        FockSpace { d, gomega },
        FieldOperators {
            aplus,
            aminus,
            alpha,
        },
    ))
}

fn favard_name(name: &str) -> &'static str {
    use crate::jacobi::{ALPHA_SYMMETRY, NORMALIZATION, POSITIVITY, SYMMETRY, UNITARITY};
    [
        NORMALIZATION,
        SYMMETRY,
        POSITIVITY,
        ALPHA_SYMMETRY,
        COMPATIBILITY,
        UNITARITY,
    ]
    .into_iter()
    .find(|n| *n == name)
    .expect("known condition")
}

/// `Gω_{n−1} A⁻_{j|n} = (A⁺_{j|n−1})ᵀ Gω_n` on every level.
pub fn verify_adjoint_relation<T: Scalar>(
    fock: &FockSpace<T>,
    ops: &FieldOperators<T>,
    tol: f64,
) -> CheckReport {
    let mut report = CheckReport::new("fock_adjointness");
    for j in 0..fock.d {
        for n in 1..=fock.top() {
            let lhs = fock.gomega[n - 1].matmul(&ops.aminus[j][n]);
            let rhs = ops.aplus[j][n - 1].transpose().matmul(&fock.gomega[n]);
            let diff = lhs.sub(&rhs);
            let ok = diff.is_zero_within(scaled(tol, rhs.max_abs()));
            report.record(n, diff.max_abs(), ok, || {
                format!(
                    "A⁻_{{{}|{n}}} is not the adjoint of A⁺_{{{0}|{}}}",
                    j + 1,
                    n - 1
                )
            });
        }
    }
    report
}

/// Level-wise vector; `None` marks a level that was pruned or never reached.
type State<T> = Vec<Option<Vec<T>>>;

/// `X_j ψ`, keeping only levels `<= keep` (higher ones cannot return to the
/// vacuum in the steps left).
fn apply_field<T: Scalar>(
    ops: &FieldOperators<T>,
    top: usize,
    psi: &State<T>,
    j: usize,
    keep: usize,
) -> State<T> {
    let mut out: State<T> = vec![None; top + 1];
    let mut add = |n: usize, v: Vec<T>| match &mut out[n] {
        Some(acc) => {
            for (a, x) in acc.iter_mut().zip(v) {
                *a = a.clone() + x;
            }
        }
        slot => *slot = Some(v),
    };
    for (n, v) in psi.iter().enumerate() {
        let Some(v) = v else { continue };
        if n < keep {
            assert!(n < top, "creation beyond the built levels");
            add(n + 1, ops.aplus[j][n].matvec(v));
        }
        if n <= keep {
            add(n, ops.alpha[j][n].matvec(v));
        }
        if n >= 1 && n - 1 <= keep {
            add(n - 1, ops.aminus[j][n].matvec(v));
        }
    }
    out
}

fn vacuum_state<T: Scalar>(top: usize) -> State<T> {
    let mut s = vec![None; top + 1];
    s[0] = Some(vec![T::one()]);
    s
}

fn vacuum_component<T: Scalar>(fock: &FockSpace<T>, psi: &State<T>) -> T {
    match &psi[0] {
        Some(v) => fock.gomega[0][(0, 0)].clone() * &v[0],
        None => T::zero(),
    }
}

/// `⟨Φ, X_{w_1} ⋯ X_{w_k} Φ⟩` for a 0-based word.
pub fn moment_of_word<T: Scalar>(
    fock: &FockSpace<T>,
    ops: &FieldOperators<T>,
    word: &[usize],
) -> Result<T> {
    let max = fock.max_word_len();
    if word.len() > max {
        return Err(Error::WordTooLong {
            len: word.len(),
            max,
        });
    }
    if let Some(&j) = word.iter().find(|&&j| j >= fock.d) {
        return Err(Error::Dimension(format!(
            "coordinate {} outside 1..={}",
            j + 1,
            fock.d
        )));
    }
    let top = fock.top();
    let mut psi = vacuum_state(top);
    for (i, &j) in word.iter().enumerate().rev() {
        psi = apply_field(ops, top, &psi, j, i);
    }
    Ok(vacuum_component(fock, &psi))
}

/// Visits the vacuum expectation of every word of length `<= max_len`
/// (`all_words`) or of every nondecreasing word, sharing prefixes of the
/// computation. Words are 0-based.
pub fn for_each_word<T: Scalar>(
    fock: &FockSpace<T>,
    ops: &FieldOperators<T>,
    max_len: usize,
    all_words: bool,
    mut visit: impl FnMut(&[usize], T),
) -> Result<()> {
    if max_len > fock.max_word_len() {
        return Err(Error::WordTooLong {
            len: max_len,
            max: fock.max_word_len(),
        });
    }
    // words are grown on the left: the new letter acts last
    #[allow(clippy::too_many_arguments)]
    fn go<T: Scalar>(
        fock: &FockSpace<T>,
        ops: &FieldOperators<T>,
        max_len: usize,
        all_words: bool,
        suffix: &mut Vec<usize>,
        psi: &State<T>,
        visit: &mut dyn FnMut(&[usize], T),
    ) {
        let word: Vec<usize> = suffix.iter().rev().cloned().collect();
        visit(&word, vacuum_component(fock, psi));
        if suffix.len() == max_len {
            return;
        }
        let upper = if all_words {
            fock.d
        } else {
            suffix.last().map_or(fock.d, |&j| j + 1)
        };
        let keep = max_len - suffix.len() - 1;
        for j in 0..upper {
            let next = apply_field(ops, fock.top(), psi, j, keep);
            suffix.push(j);
            go(fock, ops, max_len, all_words, suffix, &next, visit);
            suffix.pop();
        }
    }
    go(
        fock,
        ops,
        max_len,
        all_words,
        &mut Vec::new(),
        &vacuum_state(fock.top()),
        &mut visit,
    );
    Ok(())
}

/// Moment functional of the vacuum state up to degree `max_degree`.
pub fn reconstruct_moments<T: Scalar>(
    fock: &FockSpace<T>,
    ops: &FieldOperators<T>,
    max_degree: usize,
) -> Result<MomentFunctional<T>> {
    let mut entries = Vec::new();
    for_each_word(fock, ops, max_degree, false, |w, v| {
        entries.push((MultiIndex::from_word(fock.d, w), v));
    })?;
    MomentFunctional::from_values(fock.d, max_degree, entries, MomentSource::Reconstructed)
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundtripReport {
    pub passed: bool,
    pub words_checked: usize,
    pub max_word_len: usize,
    pub all_words: bool,
    pub max_deviation: f64,
    /// 1-based coordinates of the worst failing word.
    pub failing_word: Option<Vec<usize>>,
    /// Per word length.
    pub check: CheckReport,
}

/// Moments → Jacobi sequence → Fock space → moments, compared word by word.
pub fn roundtrip_report<T: Scalar>(
    phi: &MomentFunctional<T>,
    top: usize,
    tol: f64,
    all_words: bool,
) -> Result<RoundtripReport> {
    let dec = decompose(phi, top, tol)?;
    let (fock, ops) = build_fock(&dec.jacobi, tol)?;
    compare_moments(
        phi,
        &fock,
        &ops,
        phi.max_degree().min(fock.max_word_len()),
        tol,
        all_words,
    )
}

/// Checks every vacuum expectation of length `<= max_len` against `phi`.
pub fn compare_moments<T: Scalar>(
    phi: &MomentFunctional<T>,
    fock: &FockSpace<T>,
    ops: &FieldOperators<T>,
    max_len: usize,
    tol: f64,
    all_words: bool,
) -> Result<RoundtripReport> {
    let mut check = CheckReport::new("roundtrip");
    let mut words = 0;
    let mut worst: Option<(f64, Vec<usize>)> = None;
    let mut lookup_error = None;
    for_each_word(fock, ops, max_len, all_words, |w, v| {
        words += 1;
        let expected = match phi.moment(&MultiIndex::from_word(fock.d, w)) {
            Ok(e) => e.clone(),
            Err(e) => {
                lookup_error.get_or_insert(e);
                return;
            }
        };
        let diff = v.clone() - &expected;
        let deviation = diff.to_f64().abs();
        let ok = diff.is_negligible(scaled(tol, expected.to_f64().abs()));
        if !ok && worst.as_ref().is_none_or(|(d, _)| deviation > *d) {
            worst = Some((deviation, w.iter().map(|j| j + 1).collect()));
        }
        check.record(w.len(), deviation, ok, || {
            let w1: Vec<usize> = w.iter().map(|j| j + 1).collect();
            format!("word {w1:?}: reconstructed {v}, expected {expected}")
        });
    })?;
    if let Some(e) = lookup_error {
        return Err(e);
    }
    Ok(RoundtripReport {
        passed: check.passed,
        words_checked: words,
        max_word_len: max_len,
        all_words,
        max_deviation: check.max_deviation,
        failing_word: worst.map(|(_, w)| w),
        check,
    })
}
