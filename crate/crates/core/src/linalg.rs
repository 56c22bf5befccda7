//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{Error, Result, C64};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Largest singular value.
pub fn spectral_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// `(A + A*) / 2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigenvalues (ascending) and eigenvectors of the Hermitian part of `a`.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = hermitian_part(a);
    let n = h.nrows();
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

fn norm1(a: &CMatrix) -> f64 {
    (0..a.ncols()).map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// LU with partial pivoting. Returns the solution and the 1-norm condition number.
pub fn lu_solve(a: &CMatrix, b: &CMatrix) -> Result<(CMatrix, f64)> {
    if a.nrows() != a.ncols() || a.nrows() != b.nrows() {
        return Err(Error::Dimension(format!(
            "system {}x{} with right-hand side {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let lu = a.clone().lu();
    let inv = lu.try_inverse().ok_or(Error::Singular { condition: f64::INFINITY })?;
    let condition = norm1(a) * norm1(&inv);
    if !condition.is_finite() || condition > 1e15 {
        return Err(Error::Singular { condition });
    }
    let x = lu.solve(b).ok_or(Error::Singular { condition })?;
    Ok((x, condition))
}

/// Solution of a Hermitian positive (semi)definite system.
#[derive(Debug, Clone)]
pub struct HermitianSolve {
    pub x: CVector,
    pub condition: f64,
    /// The SVD least-squares fallback was used.
    pub fallback: bool,
}

/// Solves `A x = b` for Hermitian PSD `A` by Cholesky, falling back to SVD
/// least squares when the factorization fails or the condition estimate
/// from the Cholesky diagonal exceeds `1e14`.
pub fn solve_hermitian(a: &CMatrix, b: &CVector) -> HermitianSolve {
    let n = a.nrows();
    let a = hermitian_part(a);
    if let Some(chol) = a.clone().cholesky() {
        // (max L_ii / min L_ii)^2 bounds the 2-norm condition number from below.
        let l = chol.l_dirty();
        let (lo, hi) = (0..n).fold((f64::INFINITY, 0.0f64), |(lo, hi), i| (lo.min(l[(i, i)].re), hi.max(l[(i, i)].re)));
        let condition = (hi / lo).powi(2);
        if condition.is_finite() && condition <= 1e14 {
            return HermitianSolve { x: chol.solve(b), condition, fallback: false };
        }
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let eps = smax * 1e-14 * n.max(1) as f64;
    let x = svd.solve(b, eps).unwrap_or_else(|_| CVector::zeros(n));
    HermitianSolve { x, condition: smax / smin, fallback: true }
}

/// Weighted inner product `w * sum conj(a) b`.
pub fn inner(a: &CVector, b: &CVector, w: f64) -> C64 {
    a.dotc(b) * w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn norm_of_diagonal() {
        let a = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(0.0, -3.0), c(2.0, 0.0)]));
        assert!((spectral_norm(&a) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn eigen_of_hermitian() {
        let a = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let (vals, vecs) = hermitian_eigen(&a);
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        let recon = &vecs
            * CMatrix::from_diagonal(&CVector::from_iterator(2, vals.iter().map(|&v| c(v, 0.0))))
            * vecs.adjoint();
        assert!((recon - a).norm() < 1e-13);
    }

    #[test]
    fn lu_solves_and_reports_condition() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0, 1.0), c(2.0, 0.0), c(0.0, 0.0), c(4.0, -1.0)]);
        let b = CMatrix::from_row_slice(2, 1, &[c(1.0, 0.0), c(0.0, 1.0)]);
        let (x, cond) = lu_solve(&a, &b).unwrap();
        assert!((&a * x - &b).norm() < 1e-14);
        assert!(cond >= 1.0);
        let s = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]);
        assert!(matches!(lu_solve(&s, &b), Err(Error::Singular { .. })));
    }

    #[test]
    fn hermitian_solver_falls_back_on_singular() {
        let s = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]);
        let b = CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        let r = solve_hermitian(&s, &b);
        assert!(r.fallback);
        assert!((&s * &r.x - &b).norm() < 1e-12);
        let p = CMatrix::identity(2, 2) * c(2.0, 0.0);
        let r = solve_hermitian(&p, &b);
        assert!(!r.fallback);
        assert!((r.x[0] - c(0.5, 0.0)).norm() < 1e-15);
    }
}
