//! Creation, preservation and annihilation parts of coordinate multiplication.
//!
//! For a level-`n` basis polynomial, `X_j p_{n,m}` splits into its projections
//! onto levels `n+1`, `n` and `n−1`; nothing else survives. The three
//! projections, written in the monic bases, are the matrices `A⁺_{j|n}`,
//! `A⁰_{j|n}` and `A⁻_{j|n}`. Because the bases are monic rather than
//! orthonormal, every adjoint is G-weighted: `a*` corresponds to
//! `G⁺ aᵀ G` and identities are checked as `G·(difference) = 0`, i.e. in the
//! φ-seminorm, which is blind to the zero-norm part of each level.
//!
//! Coordinates are 0-based here.

use crate::error::Result;
use crate::gradation::GradedBasis;
use crate::linalg::Matrix;
use crate::moments::MomentFunctional;
use crate::poly::Polynomial;
use crate::report::{scaled, CheckReport};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapKind {
    Plus,
    Zero,
    Minus,
}

#[derive(Debug, Clone)]
pub struct CapOperators<T: Scalar> {
    d: usize,
    top: usize,
    /// `aplus[j][n]`: `d_{n+1} × d_n`, for `n < top`.
    aplus: Vec<Vec<Matrix<T>>>,
    /// `azero[j][n]`: `d_n × d_n`, for `n <= top`.
    azero: Vec<Vec<Matrix<T>>>,
    /// `aminus[j][n]`: `d_{n−1} × d_n`, for `n <= top`; level 0 is `0 × 1`.
    aminus: Vec<Vec<Matrix<T>>>,
    grams: Vec<Matrix<T>>,
}

/// Expands every `X_j p_{n,m}` over the neighbouring levels. Needs moments up to
/// degree `2·top + 1` (the preservation part at the top level).
pub fn extract_cap<T: Scalar>(
    gb: &GradedBasis<T>,
    phi: &MomentFunctional<T>,
) -> Result<CapOperators<T>> {
    let top = gb.top();
    phi.require_degree(2 * top + 1)?;
    let d = gb.dim();
    let mut aplus = vec![Vec::with_capacity(top); d];
    let mut azero = vec![Vec::with_capacity(top + 1); d];
    let mut aminus = vec![Vec::with_capacity(top + 1); d];
    for n in 0..=top {
        let level = gb.level(n);
        for j in 0..d {
            let images: Vec<Polynomial<T>> = level
                .basis
                .iter()
                .map(|p| p.coordinate_multiply(j))
                .collect();
            let columns = |target: usize| -> Result<Matrix<T>> {
                let cols = images
                    .iter()
                    .map(|q| gb.project_onto_level(phi, q, target))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Matrix::from_columns(gb.level(target).len(), &cols))
            };
            if n < top {
                aplus[j].push(columns(n + 1)?);
            }
            azero[j].push(columns(n)?);
            aminus[j].push(if n == 0 {
                Matrix::zeros(0, level.len())
            } else {
                columns(n - 1)?
            });
        }
    }
    Ok(CapOperators {
        d,
        top,
        aplus,
        azero,
        aminus,
        grams: gb.levels().iter().map(|l| l.gram.clone()).collect(),
    })
}

impl<T: Scalar> CapOperators<T> {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn top(&self) -> usize {
        self.top
    }

    /// `A⁺_{j|n}`, defined for `n < top`.
    pub fn aplus(&self, j: usize, n: usize) -> &Matrix<T> {
        &self.aplus[j][n]
    }

    pub fn azero(&self, j: usize, n: usize) -> &Matrix<T> {
        &self.azero[j][n]
    }

    pub fn aminus(&self, j: usize, n: usize) -> &Matrix<T> {
        &self.aminus[j][n]
    }

    pub fn gram(&self, n: usize) -> &Matrix<T> {
        &self.grams[n]
    }

    pub fn set_azero(&mut self, j: usize, n: usize, m: Matrix<T>) {
        assert_eq!(
            (m.rows(), m.cols()),
            (self.azero[j][n].rows(), self.azero[j][n].cols())
        );
        self.azero[j][n] = m;
    }

    /// `a^ε_{v|n} = Σ_j v_j a^ε_{j|n}`.
    pub fn along(&self, kind: CapKind, v: &[T], n: usize) -> Matrix<T> {
        assert_eq!(v.len(), self.d);
        let pick = |j: usize| match kind {
            CapKind::Plus => &self.aplus[j][n],
            CapKind::Zero => &self.azero[j][n],
            CapKind::Minus => &self.aminus[j][n],
        };
        let first = pick(0);
        let mut out = Matrix::zeros(first.rows(), first.cols());
        for (j, vj) in v.iter().enumerate() {
            out = out.add(&pick(j).scale(vj));
        }
        out
    }

    /// Records `G_target · Σ terms = 0` into `report`.
    fn record_identity(
        &self,
        report: &mut CheckReport,
        n: usize,
        target: usize,
        terms: &[Matrix<T>],
        tol: f64,
        describe: impl FnOnce() -> String,
    ) {
        let g = &self.grams[target];
        let mut sum = Matrix::zeros(terms[0].rows(), terms[0].cols());
        let mut magnitude: f64 = 0.0;
        for t in terms {
            sum = sum.add(t);
            magnitude += t.max_abs();
        }
        let residual = g.matmul(&sum);
        let magnitude = magnitude * g.max_abs();
        let deviation = residual.max_abs();
        let ok = residual.is_zero_within(scaled(tol, magnitude));
        report.record(n, deviation, ok, describe);
    }
}

/// Checks that `X_j p_{n,m}` equals its three-term expansion up to a φ-null
/// polynomial (for `n < top`), and that it is φ-orthogonal to every level
/// below `n−1` (all `n`).
pub fn verify_jacobi_relation<T: Scalar>(
    cap: &CapOperators<T>,
    gb: &GradedBasis<T>,
    phi: &MomentFunctional<T>,
    tol: f64,
) -> Result<CheckReport> {
    let mut report = CheckReport::new("jacobi_relation");
    let top = gb.top();
    for n in 0..=top {
        let level = gb.level(n);
        for j in 0..cap.d {
            for (c, p) in level.basis.iter().enumerate() {
                let q = p.coordinate_multiply(j);
                for k in 0..n.saturating_sub(1) {
                    let dev = gb
                        .level(k)
                        .basis
                        .iter()
                        .map(|b| phi.pair(b, &q))
                        .collect::<Result<Vec<_>>>()?;
                    let magnitude = phi.pair(p, p)?.to_f64().abs();
                    let worst = dev.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max);
                    let ok = dev.iter().all(|x| x.is_negligible(scaled(tol, magnitude)));
                    report.record(n, worst, ok, || {
                        format!("X_{} p_{{{n},{c}}} has a component at level {k}", j + 1)
                    });
                }
                if n == top {
                    continue;
                }
                let mut expansion = gb.level(n + 1).combine(&cap.aplus[j][n].column(c));
                expansion = &expansion + &level.combine(&cap.azero[j][n].column(c));
                if n > 0 {
                    expansion = &expansion + &gb.level(n - 1).combine(&cap.aminus[j][n].column(c));
                }
                let r = &q - &expansion;
                let norm = phi.pair(&r, &r)?;
                let magnitude = phi.pair(&q, &q)?.to_f64().abs();
                let ok = norm.is_negligible(scaled(tol, magnitude));
                report.record(n, norm.to_f64().abs(), ok, || {
                    format!(
                        "X_{} p_{{{n},{c}}} differs from a⁺+a⁰+a⁻ by a polynomial of norm² {norm}",
                        j + 1
                    )
                });
            }
        }
    }
    Ok(report)
}

/// `G_{n+1} A⁺_{j|n} = (A⁻_{j|n+1})ᵀ G_n` and `G_n A⁰_{j|n} = (A⁰_{j|n})ᵀ G_n`.
pub fn verify_adjointness<T: Scalar>(cap: &CapOperators<T>, tol: f64) -> CheckReport {
    let mut report = CheckReport::new("adjointness");
    for j in 0..cap.d {
        let ok = cap.aminus[j][0].rows() == 0;
        report.record(0, 0.0, ok, || {
            format!("a⁻_{{{}|0}} is not the zero map", j + 1)
        });
        for n in 0..=cap.top {
            let g = &cap.grams[n];
            let a0 = &cap.azero[j][n];
            let lhs = g.matmul(a0);
            let rhs = a0.transpose().matmul(g);
            let diff = lhs.sub(&rhs);
            let magnitude = lhs.max_abs().max(rhs.max_abs());
            let ok = diff.is_zero_within(scaled(tol, magnitude));
            report.record(n, diff.max_abs(), ok, || {
                format!("a⁰_{{{}|{n}}} is not self-adjoint", j + 1)
            });
            if n < cap.top {
                let lhs = cap.grams[n + 1].matmul(&cap.aplus[j][n]);
                let rhs = cap.aminus[j][n + 1].transpose().matmul(g);
                let diff = lhs.sub(&rhs);
                let magnitude = lhs.max_abs().max(rhs.max_abs());
                let ok = diff.is_zero_within(scaled(tol, magnitude));
                report.record(n, diff.max_abs(), ok, || {
                    format!("(a⁺_{{{0}|{n}}})* ≠ a⁻_{{{0}|{1}}}", j + 1, n + 1)
                });
            }
        }
    }
    report
}

/// All commutation relations implied by `[X_j, X_k] = 0`, sorted by how many
/// levels they shift, plus the G-weighted form
/// `G C − Cᵀ G + G [a⁰_j, a⁰_k] = 0` for `C = [a⁺_j, a⁻_k]`.
pub fn verify_commutators<T: Scalar>(cap: &CapOperators<T>, tol: f64) -> CheckReport {
    let mut report = CheckReport::new("commutators");
    let top = cap.top;
    let (p, z, m) = (&cap.aplus, &cap.azero, &cap.aminus);
    let neg = |a: &Matrix<T>| a.scale(&-T::one());
    for j in 0..cap.d {
        for k in 0..cap.d {
            let (jj, kk) = (j + 1, k + 1);
            for n in 0..=top {
                if n + 2 <= top {
                    let terms = [
                        p[j][n + 1].matmul(&p[k][n]),
                        neg(&p[k][n + 1].matmul(&p[j][n])),
                    ];
                    cap.record_identity(&mut report, n, n + 2, &terms, tol, || {
                        format!("[a⁺_{jj}, a⁺_{kk}] ≠ 0 on level {n}")
                    });
                }
                if n < top {
                    let terms = [
                        p[j][n].matmul(&z[k][n]),
                        neg(&z[k][n + 1].matmul(&p[j][n])),
                        z[j][n + 1].matmul(&p[k][n]),
                        neg(&p[k][n].matmul(&z[j][n])),
                    ];
                    cap.record_identity(&mut report, n, n + 1, &terms, tol, || {
                        format!("[a⁺_{jj}, a⁰_{kk}] + [a⁰_{jj}, a⁺_{kk}] ≠ 0 on level {n}")
                    });

                    // C = [a⁺_j, a⁻_k] restricted to level n
                    let mut c = neg(&m[k][n + 1].matmul(&p[j][n]));
                    if n > 0 {
                        c = c.add(&p[j][n - 1].matmul(&m[k][n]));
                    }
                    let mut d = m[j][n + 1].matmul(&p[k][n]);
                    if n > 0 {
                        d = d.sub(&p[k][n - 1].matmul(&m[j][n]));
                    }
                    let zz = z[j][n].matmul(&z[k][n]).sub(&z[k][n].matmul(&z[j][n]));
                    let terms = [c.clone(), zz.clone(), d];
                    cap.record_identity(&mut report, n, n, &terms, tol, || {
                        format!("[a⁺_{jj}, a⁻_{kk}] + [a⁰_{jj}, a⁰_{kk}] + [a⁻_{jj}, a⁺_{kk}] ≠ 0 on level {n}")
                    });

                    let g = &cap.grams[n];
                    let lhs = g
                        .matmul(&c)
                        .sub(&c.transpose().matmul(g))
                        .add(&g.matmul(&zz));
                    let magnitude = g.max_abs() * (2.0 * c.max_abs() + zz.max_abs());
                    let ok = lhs.is_zero_within(scaled(tol, magnitude));
                    report.record(n, lhs.max_abs(), ok, || {
                        format!("[a⁺_{jj}, a⁻_{kk}] − [a⁺_{jj}, a⁻_{kk}]* ≠ −[a⁰_{jj}, a⁰_{kk}] on level {n}")
                    });
                }
                if n >= 1 {
                    let terms = [
                        m[j][n].matmul(&z[k][n]),
                        neg(&z[k][n - 1].matmul(&m[j][n])),
                        z[j][n - 1].matmul(&m[k][n]),
                        neg(&m[k][n].matmul(&z[j][n])),
                    ];
                    cap.record_identity(&mut report, n, n - 1, &terms, tol, || {
                        format!("[a⁻_{jj}, a⁰_{kk}] + [a⁰_{jj}, a⁻_{kk}] ≠ 0 on level {n}")
                    });
                }
                if n >= 2 {
                    let terms = [
                        m[j][n - 1].matmul(&m[k][n]),
                        neg(&m[k][n - 1].matmul(&m[j][n])),
                    ];
                    cap.record_identity(&mut report, n, n - 2, &terms, tol, || {
                        format!("[a⁻_{jj}, a⁻_{kk}] ≠ 0 on level {n}")
                    });
                }
            }
        }
    }
    report
}
