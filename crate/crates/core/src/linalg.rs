//! Small dense linear algebra over [`Scalar`].
//!
//! Matrices here are tiny (a few dozen rows at most), so everything is a
//! straightforward row-major `Vec`. Rank and kernel decisions go through
//! Gauss–Jordan elimination on the exact backend and through a
//! symmetric eigendecomposition on the float backend.

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::scalar::{Backend, Scalar};

#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Display> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.data[r * self.cols..(r + 1) * self.cols]
                .iter()
                .map(|x| x.to_string())
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (r, c): (usize, usize)) -> &T {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == m), "ragged rows");
        Self {
            rows: n,
            cols: m,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Builds a `rows x columns.len()` matrix from column vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<T>]) -> Self {
        assert!(columns.iter().all(|c| c.len() == rows), "ragged columns");
        Self::from_fn(rows, columns.len(), |r, c| columns[c][r].clone())
    }

    pub fn diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, v) in diag.iter().enumerate() {
            m[(i, i)] = v.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    let prod = a.clone() * b;
                    let slot = &mut out[(i, j)];
                    *slot = slot.clone() + prod;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows).map(|r| dot(self.row(r), v)).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.clone() * s).collect(),
        }
    }

    pub fn is_zero_within(&self, tol: f64) -> bool {
        self.data.iter().all(|x| x.is_negligible(tol))
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .map(|x| x.to_f64().abs())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric_within(&self, tol: f64) -> bool {
        self.is_square() && self.sub(&self.transpose()).is_zero_within(tol)
    }

    /// Replaces a float matrix by `(A + Aᵀ)/2`; exact matrices are left untouched.
    pub fn symmetrize(&mut self) {
        if T::BACKEND == Backend::Exact {
            return;
        }
        let half = T::ratio(1, 2);
        for r in 0..self.rows {
            for c in r + 1..self.cols {
                let v = (self[(r, c)].clone() + &self[(c, r)]) * &half;
                self[(r, c)] = v.clone();
                self[(c, r)] = v;
            }
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)].to_f64())
    }

    /// `xᵀ G x`.
    pub fn quadratic_form(&self, x: &[T]) -> T {
        dot(x, &self.matvec(x))
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y)
}

/// Reduced row echelon form. Returns the reduced matrix and its pivot columns.
pub fn rref<T: Scalar>(m: &Matrix<T>, tol: f64) -> (Matrix<T>, Vec<usize>) {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..a.cols {
        if row == a.rows {
            break;
        }
        let best = (row..a.rows)
            .filter(|&r| !a[(r, col)].is_negligible(tol))
            .max_by(|&x, &y| {
                a[(x, col)]
                    .to_f64()
                    .abs()
                    .total_cmp(&a[(y, col)].to_f64().abs())
            });
        let Some(p) = best else {
            for r in row..a.rows {
                a[(r, col)] = T::zero();
            }
            continue;
        };
        for c in 0..a.cols {
            a.data.swap(row * a.cols + c, p * a.cols + c);
        }
        let inv = T::one() / a[(row, col)].clone();
        for c in col..a.cols {
            a[(row, c)] = a[(row, c)].clone() * &inv;
        }
        for r in 0..a.rows {
            if r == row || a[(r, col)].is_zero() {
                continue;
            }
            let f = a[(r, col)].clone();
            for c in col..a.cols {
                let v = a[(r, c)].clone() - f.clone() * &a[(row, c)];
                a[(r, c)] = v;
            }
            a[(r, col)] = T::zero();
        }
        pivots.push(col);
        row += 1;
    }
    (a, pivots)
}

/// Basis of `{x : A x = 0}` read off the reduced row echelon form.
pub fn nullspace<T: Scalar>(m: &Matrix<T>, tol: f64) -> Vec<Vec<T>> {
    let (r, pivots) = rref(m, tol);
    let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![T::zero(); m.cols];
            v[f] = T::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -r[(i, f)].clone();
            }
            v
        })
        .collect()
}

pub fn rank<T: Scalar>(m: &Matrix<T>, tol: f64) -> usize {
    rref(m, tol).1.len()
}

/// Some solution of `A x = b` with free variables set to zero, or `None` when
/// the system is inconsistent.
pub fn particular_solution<T: Scalar>(a: &Matrix<T>, b: &[T], tol: f64) -> Option<Vec<T>> {
    let aug = Matrix::from_fn(a.rows, a.cols + 1, |r, c| {
        if c < a.cols {
            a[(r, c)].clone()
        } else {
            b[r].clone()
        }
    });
    let (red, pivots) = rref(&aug, tol);
    if pivots.last() == Some(&a.cols) {
        return None;
    }
    let mut x = vec![T::zero(); a.cols];
    for (i, &p) in pivots.iter().enumerate() {
        x[p] = red[(i, a.cols)].clone();
    }
    Some(x)
}

/// Inverse of a nonsingular square matrix.
pub fn inverse<T: Scalar>(m: &Matrix<T>, tol: f64) -> Option<Matrix<T>> {
    assert!(m.is_square());
    let n = m.rows;
    let aug = Matrix::from_fn(n, 2 * n, |r, c| {
        if c < n {
            m[(r, c)].clone()
        } else if c - n == r {
            T::one()
        } else {
            T::zero()
        }
    });
    let (red, pivots) = rref(&aug, tol);
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    Some(Matrix::from_fn(n, n, |r, c| red[(r, n + c)].clone()))
}

/// Kernel-vs-range threshold for the float backend: eigenvalues at or below
/// `tol · max(λ_max, 1)` count as zero. The floor of 1 is the scale of φ(1).
pub fn float_threshold(lambda_max: f64, tol: f64) -> f64 {
    tol * lambda_max.max(1.0)
}

/// Moore–Penrose data of a symmetric positive semidefinite matrix.
#[derive(Clone)]
pub struct PsdPseudoInverse<T> {
    /// `G⁺`.
    pub pinv: Matrix<T>,
    /// `G G⁺`, the orthogonal projector onto `range(G)`.
    pub projector: Matrix<T>,
    /// Spanning set of `ker G`.
    pub kernel: Vec<Vec<T>>,
    pub rank: usize,
}

impl<T: Scalar> fmt::Debug for PsdPseudoInverse<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PsdPseudoInverse")
            .field("rank", &self.rank)
            .field("kernel_dim", &self.kernel.len())
            .field("pinv", &self.pinv)
            .finish()
    }
}

impl<T: Scalar> PsdPseudoInverse<T> {
    pub fn new(g: &Matrix<T>, tol: f64) -> Self {
        assert!(g.is_square(), "pseudo-inverse of a non-square Gram matrix");
        match T::BACKEND {
            Backend::Exact => Self::exact(g),
            Backend::Float => Self::float(g, tol),
        }
    }

    // G = R B Rᵀ with R the pivot columns of G, so G⁺ = R (RᵀGR)⁻¹ Rᵀ.
    fn exact(g: &Matrix<T>) -> Self {
        let n = g.rows;
        let (_, pivots) = rref(g, 0.0);
        let kernel = nullspace(g, 0.0);
        let r = Matrix::from_fn(n, pivots.len(), |i, k| g[(i, pivots[k])].clone());
        let pinv = if pivots.is_empty() {
            Matrix::zeros(n, n)
        } else {
            let inner = r.transpose().matmul(g).matmul(&r);
            let inner_inv = inverse(&inner, 0.0).expect("Gram block on range is nonsingular");
            r.matmul(&inner_inv).matmul(&r.transpose())
        };
        let projector = g.matmul(&pinv);
        Self {
            pinv,
            projector,
            kernel,
            rank: pivots.len(),
        }
    }

    fn float(g: &Matrix<T>, tol: f64) -> Self {
        let n = g.rows;
        if n == 0 {
            return Self {
                pinv: Matrix::zeros(0, 0),
                projector: Matrix::zeros(0, 0),
                kernel: Vec::new(),
                rank: 0,
            };
        }
        let eig = SymmetricEigen::new(g.to_nalgebra());
        let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
        let thresh = float_threshold(lmax, tol);
        let mut pinv = DMatrix::<f64>::zeros(n, n);
        let mut proj = DMatrix::<f64>::zeros(n, n);
        let mut kernel = Vec::new();
        let mut rank = 0;
        for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
            let v = eig.eigenvectors.column(i);
            if lambda > thresh {
                pinv += (v * v.transpose()) / lambda;
                proj += v * v.transpose();
                rank += 1;
            } else {
                kernel.push(v.iter().map(|&x| T::from_f64(x)).collect());
            }
        }
        let back = |m: &DMatrix<f64>| Matrix::from_fn(n, n, |r, c| T::from_f64(m[(r, c)]));
        Self {
            pinv: back(&pinv),
            projector: back(&proj),
            kernel,
            rank,
        }
    }

    pub fn dim(&self) -> usize {
        self.pinv.rows()
    }

    /// Least-norm solution of `G x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        self.pinv.matvec(b)
    }

    /// Least-norm solution, or `None` if `b` has a component in `ker G`
    /// (larger than `tol · max(1, |b|)` on the float backend).
    pub fn solve_consistent(&self, b: &[T], tol: f64) -> Option<Vec<T>> {
        let pb = self.projector.matvec(b);
        let scale = b.iter().map(|x| x.to_f64().abs()).fold(1.0, f64::max);
        let ok = pb
            .iter()
            .zip(b)
            .all(|(p, x)| (p.clone() - x).is_negligible(tol * scale));
        ok.then(|| self.solve(b))
    }
}

/// Least-norm pseudo-inverse of an arbitrary matrix via `A⁺ = (AᵀA)⁺ Aᵀ`.
pub fn pseudo_inverse<T: Scalar>(a: &Matrix<T>, tol: f64) -> Matrix<T> {
    let at = a.transpose();
    let mut ata = at.matmul(a);
    ata.symmetrize();
    PsdPseudoInverse::new(&ata, tol).pinv.matmul(&at)
}

/// Outcome of a positive semidefiniteness test.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdCheck {
    pub psd: bool,
    pub rank: usize,
    /// Smallest eigenvalue (computed in f64, informational on the exact backend).
    pub min_eigenvalue: f64,
}

pub fn check_psd<T: Scalar>(g: &Matrix<T>, tol: f64) -> PsdCheck {
    assert!(g.is_square());
    let min_eigenvalue = if g.rows == 0 {
        0.0
    } else {
        SymmetricEigen::new(g.to_nalgebra())
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    };
    match T::BACKEND {
        Backend::Exact => {
            let (psd, rank) = ldl_psd(g);
            PsdCheck {
                psd,
                rank,
                min_eigenvalue,
            }
        }
        Backend::Float => {
            if g.rows == 0 {
                return PsdCheck {
                    psd: true,
                    rank: 0,
                    min_eigenvalue,
                };
            }
            let eig = SymmetricEigen::new(g.to_nalgebra());
            let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
            let thresh = float_threshold(lmax, tol);
            PsdCheck {
                psd: g.is_symmetric_within(thresh) && min_eigenvalue >= -thresh,
                rank: eig.eigenvalues.iter().filter(|&&l| l > thresh).count(),
                min_eigenvalue,
            }
        }
    }
}

/// Symmetric LDLᵀ with diagonal pivoting; inspects pivot signs.
/// Returns `(is_psd, rank)`. Exact arithmetic only.
fn ldl_psd<T: Scalar>(g: &Matrix<T>) -> (bool, usize) {
    if !g.is_symmetric_within(0.0) {
        return (false, 0);
    }
    let mut a = g.clone();
    let mut alive: Vec<usize> = (0..a.rows).collect();
    let mut rank = 0;
    loop {
        let pivot = alive.iter().position(|&i| a[(i, i)].is_positive(0.0));
        let Some(pos) = pivot else {
            // no positive pivot left: the Schur complement must vanish
            let rest_zero = alive
                .iter()
                .all(|&r| alive.iter().all(|&c| a[(r, c)].is_zero()));
            return (rest_zero, rank);
        };
        let p = alive.remove(pos);
        let d = a[(p, p)].clone();
        for &r in &alive {
            if a[(r, p)].is_zero() {
                continue;
            }
            let l = a[(r, p)].clone() / d.clone();
            for &c in &alive {
                let v = a[(r, c)].clone() - l.clone() * &a[(p, c)];
                a[(r, c)] = v;
            }
        }
        rank += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use num_traits::Zero;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn qm(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Rational::from_i64(x)).collect())
                .collect(),
        )
    }

    #[test]
    fn exact_pinv_of_rank_deficient_gram() {
        // circle level-2 Gram (scaled by 8)
        let g = qm(&[&[1, 0, -1], &[0, 1, 0], &[-1, 0, 1]]);
        let pi = PsdPseudoInverse::new(&g, 0.0);
        assert_eq!(pi.rank, 2);
        assert_eq!(pi.kernel.len(), 1);
        assert!(g.matvec(&pi.kernel[0]).iter().all(|x| x.is_zero()));
        // Penrose conditions
        assert_eq!(g.matmul(&pi.pinv).matmul(&g), g);
        assert_eq!(pi.pinv.matmul(&g).matmul(&pi.pinv), pi.pinv);
        assert!(pi.projector.is_symmetric_within(0.0));
        let expected_proj = Matrix::from_rows(vec![
            vec![q(1, 2), q(0, 1), q(-1, 2)],
            vec![q(0, 1), q(1, 1), q(0, 1)],
            vec![q(-1, 2), q(0, 1), q(1, 2)],
        ]);
        assert_eq!(pi.projector, expected_proj);
    }

    #[test]
    fn least_norm_solution_is_orthogonal_to_kernel() {
        let g = qm(&[&[1, 0, -1], &[0, 1, 0], &[-1, 0, 1]]);
        let pi = PsdPseudoInverse::new(&g, 0.0);
        let b = vec![q(2, 1), q(3, 1), q(-2, 1)];
        let x = pi.solve_consistent(&b, 0.0).unwrap();
        assert_eq!(g.matvec(&x), b);
        assert!(dot(&x, &pi.kernel[0]).is_zero());
        assert!(pi
            .solve_consistent(&[q(1, 1), q(0, 1), q(0, 1)], 0.0)
            .is_none());
    }

    #[test]
    fn float_pinv_matches_exact() {
        let g = qm(&[&[4, 2, 0], &[2, 2, 0], &[0, 0, 0]]);
        let e = PsdPseudoInverse::new(&g, 0.0);
        let f = PsdPseudoInverse::new(&g.map(|x| x.to_f64()), 1e-10);
        assert_eq!(f.rank, e.rank);
        for r in 0..3 {
            for c in 0..3 {
                assert!((f.pinv[(r, c)] - e.pinv[(r, c)].to_f64()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ldl_detects_indefinite_and_semidefinite() {
        assert_eq!(ldl_psd(&qm(&[&[1, 0], &[0, -1]])), (false, 1));
        assert_eq!(ldl_psd(&qm(&[&[0, 1], &[1, 0]])), (false, 0));
        assert_eq!(ldl_psd(&qm(&[&[1, 1], &[1, 1]])), (true, 1));
        assert_eq!(ldl_psd(&qm(&[&[2, 1], &[1, 2]])), (true, 2));
        assert_eq!(ldl_psd(&qm(&[&[0, 0], &[0, 0]])), (true, 0));
        // 1x1 with negative entry
        assert_eq!(ldl_psd(&qm(&[&[-1]])), (false, 0));
    }

    #[test]
    fn inverse_and_particular_solution() {
        let a = qm(&[&[2, 1], &[1, 1]]);
        let inv = inverse(&a, 0.0).unwrap();
        assert_eq!(a.matmul(&inv), Matrix::identity(2));
        assert!(inverse(&qm(&[&[1, 2], &[2, 4]]), 0.0).is_none());
        let s = qm(&[&[1, 2], &[2, 4]]);
        assert!(particular_solution(&s, &[q(1, 1), q(3, 1)], 0.0).is_none());
        let x = particular_solution(&s, &[q(1, 1), q(2, 1)], 0.0).unwrap();
        assert_eq!(s.matvec(&x), vec![q(1, 1), q(2, 1)]);
    }

    #[test]
    fn general_pseudo_inverse_penrose() {
        let a = qm(&[&[1, 2], &[2, 4], &[0, 0]]);
        let p = pseudo_inverse(&a, 0.0);
        assert_eq!(a.matmul(&p).matmul(&a), a);
        assert_eq!(p.matmul(&a).matmul(&p), p);
    }
}
