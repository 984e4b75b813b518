//! Dense floating-point kernels on top of `faer`.
//!
//! The exact layer in [`crate::linalg`] settles every structural question
//! (ranks, kernels, span equalities), so nothing here is ever the sole
//! witness for a theorem.  This module covers the quantitative side:
//! condition estimates attached to unisolvence reports, float-mode rank
//! decisions with an explicit singular-value gap, and the factorizations
//! the time stepper builds once and reuses.

use faer::linalg::triangular_solve;
use faer::linalg::solvers::SpSolver;
use faer::{Mat, MatRef, Parallelism, Side};

use crate::linalg::SparseRow;
use crate::num::{rat_to_f64, Rat};
use crate::{Error, Result};

/// Relative threshold under which a singular value counts as zero.
pub const RANK_EPS: f64 = 1e-9;

/// Minimum relative gap between the smallest kept and the largest dropped
/// singular value for a float rank decision to be trusted.
pub const RANK_GAP_MIN: f64 = 1e3;

/// Converts dense rational rows to a float matrix.
pub fn mat_from_rat_rows(rows: &[Vec<Rat>]) -> Mat<f64> {
    let ncols = rows.first().map_or(0, Vec::len);
    Mat::from_fn(rows.len(), ncols, |i, j| rat_to_f64(&rows[i][j]))
}

/// Converts sorted sparse rational rows to a dense float matrix.
pub fn mat_from_sparse_rows(rows: &[SparseRow], ncols: usize) -> Mat<f64> {
    let mut m = Mat::zeros(rows.len(), ncols);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row {
            m[(i, *j)] = rat_to_f64(v);
        }
    }
    m
}

/// Singular values in descending order.
pub fn singular_values(a: MatRef<'_, f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    a.singular_values()
}

/// Outcome of a float rank decision.
///
/// `gap = smallest_kept / largest_dropped` measures how far the decision is
/// from being tolerance-fragile; it is infinite when nothing was dropped or
/// the matrix is zero.
#[derive(Clone, Copy, Debug)]
pub struct FloatRank {
    pub rank: usize,
    pub sigma_max: f64,
    pub smallest_kept: f64,
    pub largest_dropped: f64,
    pub gap: f64,
}

/// Rank of `a` counting singular values above `eps * sigma_max`.
pub fn float_rank(a: MatRef<'_, f64>, eps: f64) -> FloatRank {
    let sv = singular_values(a);
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let cut = eps * sigma_max;
    let rank = sv.iter().take_while(|&&s| s > cut).count();
    let smallest_kept = if rank > 0 { sv[rank - 1] } else { 0.0 };
    let largest_dropped = sv.get(rank).copied().unwrap_or(0.0);
    let gap = if largest_dropped == 0.0 {
        f64::INFINITY
    } else {
        smallest_kept / largest_dropped
    };
    FloatRank { rank, sigma_max, smallest_kept, largest_dropped, gap }
}

/// Two-norm condition number sigma_max / sigma_min (infinite if singular).
pub fn condition_estimate(a: MatRef<'_, f64>) -> f64 {
    let sv = singular_values(a);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// LU factorization with partial pivoting, built once and reused.
pub struct LuFactor {
    lu: faer::linalg::solvers::PartialPivLu<f64>,
    n: usize,
}

impl LuFactor {
    /// Factors a square matrix, rejecting exact zero pivots.
    pub fn new(a: MatRef<'_, f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::LinAlg(format!(
                "LU needs a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let lu = a.partial_piv_lu();
        let u = lu.compute_u();
        for i in 0..n {
            if u[(i, i)] == 0.0 || !u[(i, i)].is_finite() {
                return Err(Error::LinAlg(format!("LU pivot {i} is {}", u[(i, i)])));
            }
        }
        Ok(Self { lu, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve_mat(&self, rhs: MatRef<'_, f64>) -> Mat<f64> {
        self.lu.solve(rhs)
    }

    pub fn solve_vec(&self, rhs: &[f64]) -> Vec<f64> {
        let b = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        let x = self.lu.solve(b);
        (0..rhs.len()).map(|i| x[(i, 0)]).collect()
    }
}

/// Cholesky factorization of a symmetric positive definite matrix.
pub struct CholFactor {
    llt: faer::linalg::solvers::Cholesky<f64>,
    n: usize,
}

impl CholFactor {
    /// Factors `a`; fails if the matrix is not positive definite.
    pub fn new(a: MatRef<'_, f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::LinAlg(format!(
                "Cholesky needs a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let llt = a
            .cholesky(Side::Lower)
            .map_err(|_| Error::LinAlg("matrix is not positive definite".into()))?;
        Ok(Self { llt, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The lower triangular factor L with A = L L^T.
    pub fn l(&self) -> Mat<f64> {
        self.llt.compute_l()
    }

    pub fn solve_mat(&self, rhs: MatRef<'_, f64>) -> Mat<f64> {
        self.llt.solve(rhs)
    }

    pub fn solve_vec(&self, rhs: &[f64]) -> Vec<f64> {
        let b = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        let x = self.llt.solve(b);
        (0..rhs.len()).map(|i| x[(i, 0)]).collect()
    }
}

/// Eigenvalues of a symmetric matrix (lower triangle read), ascending.
pub fn symmetric_eigenvalues(a: MatRef<'_, f64>) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    a.selfadjoint_eigenvalues(Side::Lower)
}

/// Full symmetric eigendecomposition: ascending eigenvalues and the matrix
/// of orthonormal eigenvector columns in the same order.
pub fn symmetric_eigen(a: MatRef<'_, f64>) -> (Vec<f64>, Mat<f64>) {
    if a.nrows() == 0 {
        return (Vec::new(), Mat::zeros(0, 0));
    }
    let evd = a.selfadjoint_eigendecomposition(Side::Lower);
    let s = evd.s().column_vector();
    let vals = (0..a.nrows()).map(|i| s[i]).collect();
    (vals, evd.u().to_owned())
}

/// Eigenvalues of the pencil `K x = lambda M x` with `K` symmetric and `M`
/// symmetric positive definite, ascending.  Reduced to a standard symmetric
/// problem through the Cholesky factor of `M`.
pub fn generalized_symmetric_eigenvalues(
    k: MatRef<'_, f64>,
    m: MatRef<'_, f64>,
) -> Result<Vec<f64>> {
    let n = k.nrows();
    if k.ncols() != n || m.nrows() != n || m.ncols() != n {
        return Err(Error::LinAlg(format!(
            "pencil needs equal square matrices, got {}x{} and {}x{}",
            k.nrows(),
            k.ncols(),
            m.nrows(),
            m.ncols()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let l = CholFactor::new(m)?.l();
    // W = L^{-1} K L^{-T}, formed by two triangular solves; same spectrum as
    // the pencil, and symmetric whenever K is.
    let mut x = k.to_owned();
    triangular_solve::solve_lower_triangular_in_place(l.as_ref(), x.as_mut(), Parallelism::None);
    let mut xt = x.transpose().to_owned();
    triangular_solve::solve_lower_triangular_in_place(l.as_ref(), xt.as_mut(), Parallelism::None);
    Ok(xt.as_ref().selfadjoint_eigenvalues(Side::Lower))
}

/// Eigenvalues of a general square real matrix as `(re, im)` pairs, sorted
/// by descending modulus then descending imaginary part.
pub fn complex_eigenvalues(a: MatRef<'_, f64>) -> Vec<(f64, f64)> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let mut out: Vec<(f64, f64)> = a
        .eigenvalues::<faer::complex_native::c64>()
        .into_iter()
        .map(|z| (z.re, z.im))
        .collect();
    out.sort_by(|a, b| {
        let (ma, mb) = (a.0.hypot(a.1), b.0.hypot(b.1));
        mb.partial_cmp(&ma)
            .unwrap()
            .then(b.1.partial_cmp(&a.1).unwrap())
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn rational_conversion() {
        let rows = vec![vec![rat(1, 2), rat(-3, 4)], vec![rat(0, 1), rat(5, 1)]];
        let m = mat_from_rat_rows(&rows);
        assert_eq!((m.nrows(), m.ncols()), (2, 2));
        assert_eq!(m[(0, 0)], 0.5);
        assert_eq!(m[(0, 1)], -0.75);
        assert_eq!(m[(1, 1)], 5.0);

        let sparse: Vec<SparseRow> = vec![vec![(2, rat(7, 2))], vec![]];
        let s = mat_from_sparse_rows(&sparse, 4);
        assert_eq!((s.nrows(), s.ncols()), (2, 4));
        assert_eq!(s[(0, 2)], 3.5);
        assert_eq!(s[(1, 3)], 0.0);
    }

    #[test]
    fn float_rank_detects_gap() {
        // rank-2 matrix built from two scaled outer products
        let u = [[1.0, 2.0, 0.0, -1.0, 3.0], [2.0, -1.0, 1.0, 0.0, 1.0]];
        let v = [[1.0, 1.0, -2.0, 0.5], [0.0, 3.0, 1.0, -1.0]];
        let a = Mat::from_fn(5, 4, |i, j| u[0][i] * v[0][j] + 0.01 * u[1][i] * v[1][j]);
        let r = float_rank(a.as_ref(), RANK_EPS);
        assert_eq!(r.rank, 2);
        assert!(r.gap >= RANK_GAP_MIN, "gap {} too small", r.gap);
        assert!(r.sigma_max > 1.0);
        assert!(r.largest_dropped < 1e-12 * r.sigma_max);

        let z = Mat::<f64>::zeros(3, 3);
        let rz = float_rank(z.as_ref(), RANK_EPS);
        assert_eq!(rz.rank, 0);
        assert!(rz.gap.is_infinite());

        let id = Mat::<f64>::from_fn(4, 4, |i, j| f64::from(i == j));
        let ri = float_rank(id.as_ref(), RANK_EPS);
        assert_eq!(ri.rank, 4);
        assert!(ri.gap.is_infinite());
        assert_eq!(ri.smallest_kept, 1.0);
    }

    #[test]
    fn condition_of_diagonal_matrix() {
        let d = Mat::from_fn(3, 3, |i, j| if i == j { [1.0, 4.0, 10.0][i] } else { 0.0 });
        assert!(close(condition_estimate(d.as_ref()), 10.0, 1e-12));
        let s = Mat::from_fn(2, 2, |_, _| 1.0);
        assert!(condition_estimate(s.as_ref()).is_infinite());
    }

    #[test]
    fn lu_solves_and_rejects_singular() {
        let a = faer::mat![[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]];
        let lu = LuFactor::new(a.as_ref()).unwrap();
        let x = lu.solve_vec(&[3.0, 5.0, 3.0]);
        // residual check
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| a[(i, j)] * x[j]).sum();
            assert!(close(r, [3.0, 5.0, 3.0][i], 1e-12));
        }
        let sing = faer::mat![[1.0, 2.0], [2.0, 4.0]];
        assert!(LuFactor::new(sing.as_ref()).is_err());
        let rect = Mat::<f64>::zeros(2, 3);
        assert!(LuFactor::new(rect.as_ref()).is_err());
    }

    #[test]
    fn cholesky_solves_spd_and_rejects_indefinite() {
        let a = faer::mat![[4.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]];
        let ch = CholFactor::new(a.as_ref()).unwrap();
        let x = ch.solve_vec(&[1.0, 2.0, 3.0]);
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| a[(i, j)] * x[j]).sum();
            assert!(close(r, [1.0, 2.0, 3.0][i], 1e-12));
        }
        // L L^T reproduces A
        let l = ch.l();
        for i in 0..3 {
            for j in 0..3 {
                let r: f64 = (0..3).map(|k| l[(i, k)] * l[(j, k)]).sum();
                assert!(close(r, a[(i, j)], 1e-12));
            }
        }
        let indef = faer::mat![[1.0, 0.0], [0.0, -1.0]];
        assert!(CholFactor::new(indef.as_ref()).is_err());
    }

    #[test]
    fn symmetric_eigen_reconstructs() {
        let a = faer::mat![[2.0, 1.0], [1.0, 2.0]];
        let vals = symmetric_eigenvalues(a.as_ref());
        assert!(close(vals[0], 1.0, 1e-12) && close(vals[1], 3.0, 1e-12));
        let (ev, u) = symmetric_eigen(a.as_ref());
        for (c, lam) in ev.iter().enumerate() {
            for i in 0..2 {
                let au: f64 = (0..2).map(|j| a[(i, j)] * u[(j, c)]).sum();
                assert!(close(au, lam * u[(i, c)], 1e-12));
            }
        }
    }

    #[test]
    fn generalized_pencil_eigenvalues() {
        let k = faer::mat![[2.0, 0.0], [0.0, 8.0]];
        let m = faer::mat![[1.0, 0.0], [0.0, 2.0]];
        let ev = generalized_symmetric_eigenvalues(k.as_ref(), m.as_ref()).unwrap();
        assert!(close(ev[0], 2.0, 1e-12) && close(ev[1], 4.0, 1e-12));
        // pencil (K, K) is the identity spectrum
        let ones = generalized_symmetric_eigenvalues(k.as_ref(), k.as_ref()).unwrap();
        assert!(ones.iter().all(|&x| close(x, 1.0, 1e-12)));
        let bad = faer::mat![[1.0, 0.0], [0.0, -1.0]];
        assert!(generalized_symmetric_eigenvalues(k.as_ref(), bad.as_ref()).is_err());
    }

    #[test]
    fn rotation_eigenvalues_are_imaginary_pair() {
        let g = faer::mat![[0.0, -1.0], [1.0, 0.0]];
        let ev = complex_eigenvalues(g.as_ref());
        assert_eq!(ev.len(), 2);
        assert!(close(ev[0].0, 0.0, 1e-12) && close(ev[0].1, 1.0, 1e-12));
        assert!(close(ev[1].0, 0.0, 1e-12) && close(ev[1].1, -1.0, 1e-12));
    }

    #[test]
    fn singular_values_match_frobenius() {
        let a = faer::mat![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]];
        let sv = singular_values(a.as_ref());
        assert!(sv[0] >= sv[1]);
        let fro: f64 = (0..3)
            .map(|i| (0..2).map(|j| a[(i, j)] * a[(i, j)]).sum::<f64>())
            .sum();
        let ssq: f64 = sv.iter().map(|s| s * s).sum();
        assert!(close(fro, ssq, 1e-10));
        assert!(singular_values(Mat::<f64>::zeros(0, 3).as_ref()).is_empty());
    }
}
