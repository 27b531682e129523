//! Orthogonal polynomial decomposition `𝒫 = ⊕_n 𝒫_{n,φ}`.
//!
//! Level `n` is spanned by the monic polynomials
//! `p_{n,m} = X^m − P_{n−1]}(X^m)`, where `P_{n−1]}` projects onto the
//! previously built levels. Each per-level projection is the least-norm
//! solution of `G_k c = [⟨p_{k,m'}, X^m⟩]_{m'}`, so zero-norm directions of
//! `G_k` never receive weight and the representatives stay exactly monic.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, PsdPseudoInverse};
use crate::mindex::{enumerate_level, MultiIndex};
use crate::moments::MomentFunctional;
use crate::poly::Polynomial;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct GradedLevel<T: Scalar> {
    pub n: usize,
    pub indices: Vec<MultiIndex>,
    /// Monic representatives `p_{n,m}` in `indices` order.
    pub basis: Vec<Polynomial<T>>,
    /// `G_n[a][b] = ⟨p_{n,a}, p_{n,b}⟩_φ`.
    pub gram: Matrix<T>,
    pub pinv: PsdPseudoInverse<T>,
}

impl<T: Scalar> GradedLevel<T> {
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.pinv.rank
    }

    pub fn kernel(&self) -> &[Vec<T>] {
        &self.pinv.kernel
    }

    /// `Σ_m c_m p_{n,m}`.
    pub fn combine(&self, coeffs: &[T]) -> Polynomial<T> {
        assert_eq!(coeffs.len(), self.basis.len());
        let d = self.indices[0].dim();
        let mut out = Polynomial::zero(d);
        for (c, p) in coeffs.iter().zip(&self.basis) {
            out.add_scaled(c, p);
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct GradedBasis<T: Scalar> {
    d: usize,
    tol: f64,
    levels: Vec<GradedLevel<T>>,
}

impl<T: Scalar> GradedBasis<T> {
    /// Builds levels `0..=top`. Needs moments up to degree `2·top` and a
    /// positive functional.
    pub fn build(phi: &MomentFunctional<T>, top: usize, tol: f64) -> Result<Self> {
        phi.require_degree(2 * top)?;
        let positivity = phi.check_state_positivity(top, tol)?;
        if let Some(level) = positivity.first_failure() {
            return Err(Error::NotPositive { level });
        }
        let d = phi.dim();
        let mut levels: Vec<GradedLevel<T>> = Vec::with_capacity(top + 1);
        for n in 0..=top {
            let indices = enumerate_level(d, n);
            let mut basis = Vec::with_capacity(indices.len());
            for m in &indices {
                let mono = Polynomial::monomial(m.clone());
                let mut p = mono.clone();
                for lower in &levels {
                    let b = lower
                        .basis
                        .iter()
                        .map(|q| phi.pair(q, &mono))
                        .collect::<Result<Vec<_>>>()?;
                    let c = lower.pinv.solve(&b);
                    for (ci, q) in c.iter().zip(&lower.basis) {
                        p.add_scaled(&-ci.clone(), q);
                    }
                }
                basis.push(p);
            }
            // p_{n,a} − X^{m_a} lies in lower levels, which are orthogonal to p_{n,b}
            let monomials: Vec<_> = indices.iter().cloned().map(Polynomial::monomial).collect();
            let mut gram = phi.gram(&monomials, &basis)?;
            gram.symmetrize();
            let pinv = PsdPseudoInverse::new(&gram, tol);
            levels.push(GradedLevel {
                n,
                indices,
                basis,
                gram,
                pinv,
            });
        }
        Ok(Self { d, tol, levels })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn top(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn level(&self, n: usize) -> &GradedLevel<T> {
        &self.levels[n]
    }

    pub fn levels(&self) -> &[GradedLevel<T>] {
        &self.levels
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.levels.iter().map(GradedLevel::rank).collect()
    }

    pub fn kernel_basis(&self, n: usize) -> &[Vec<T>] {
        self.levels[n].kernel()
    }

    /// Least-norm coordinates of `P_n(q)` in the monic basis of level `n`.
    pub fn project_onto_level(
        &self,
        phi: &MomentFunctional<T>,
        q: &Polynomial<T>,
        n: usize,
    ) -> Result<Vec<T>> {
        let level = &self.levels[n];
        let b = level
            .basis
            .iter()
            .map(|p| phi.pair(p, q))
            .collect::<Result<Vec<_>>>()?;
        Ok(level.pinv.solve(&b))
    }

    /// Smallest level whose Gram matrix has rank 0. Every later built level
    /// must then be null as well.
    pub fn termination_level(&self) -> Option<usize> {
        let first = self.levels.iter().position(|l| l.rank() == 0)?;
        assert!(
            self.levels[first..].iter().all(|l| l.rank() == 0),
            "rank revived after termination at level {first}"
        );
        Some(first)
    }

    pub fn summary(&self) -> GradationSummary {
        GradationSummary {
            levels: self.levels.iter().map(|l| l.len()).collect(),
            ranks: self.ranks(),
            kernel_dims: self.levels.iter().map(|l| l.kernel().len()).collect(),
            termination_level: self.termination_level(),
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct GradationSummary {
    pub levels: Vec<usize>,
    pub ranks: Vec<usize>,
    pub kernel_dims: Vec<usize>,
    pub termination_level: Option<usize>,
}
