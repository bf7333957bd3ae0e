//! Dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted ascending.
///
/// Columns of the returned matrix are the matching unit-norm eigenvectors.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `R^(-1/2)` for a Hermitian positive definite `R`.
pub fn hermitian_inv_sqrt(m: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let scaled = CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| {
        vectors[(r, c)] * (1.0 / values[c].max(f64::MIN_POSITIVE).sqrt())
    });
    &scaled * vectors.adjoint()
}

/// Column-wise Kronecker product: column `k` is `a_k (x) b_k`.
pub fn khatri_rao(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.ncols(), "Khatri-Rao operands need equal column counts");
    let (ra, rb) = (a.nrows(), b.nrows());
    CMatrix::from_fn(ra * rb, a.ncols(), |row, col| a[(row / rb, col)] * b[(row % rb, col)])
}

/// Column-major `vec` of a square identity, i.e. `vec(I_n)`.
pub fn vec_identity(n: usize) -> CVector {
    CVector::from_fn(n * n, |i, _| {
        if i % n == i / n {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Applies `(R^T (x) R)^(-1/2)` to every column of `x` (each of length `n^2`).
///
/// With `S = R^(-1/2)` Hermitian, `(S^T (x) S) vec(X) = vec(S X S)`, so the
/// `n^2 x n^2` Kronecker factor is never formed.
pub fn whiten_vec_columns(inv_sqrt: &CMatrix, x: &CMatrix) -> CMatrix {
    let n = inv_sqrt.nrows();
    assert_eq!(x.nrows(), n * n);
    let mut out = CMatrix::zeros(n * n, x.ncols());
    for col in 0..x.ncols() {
        let block = CMatrix::from_column_slice(n, n, x.column(col).as_slice());
        let w = inv_sqrt * block * inv_sqrt;
        out.column_mut(col).copy_from_slice(w.as_slice());
    }
    out
}

/// Orthogonal-complement projection `x - U U^H x` where `U` spans the column
/// space of `basis` (rank decided by a relative singular-value cutoff).
pub fn project_out(basis: &CMatrix, x: &CMatrix) -> CMatrix {
    let svd = basis.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().copied().fold(0.0_f64, f64::max);
    let cutoff = smax * 1e-13 * (basis.nrows().max(basis.ncols()) as f64);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > cutoff)
        .collect();
    let u = CMatrix::from_fn(u.nrows(), keep.len(), |r, c| u[(r, keep[c])]);
    x - &u * (u.adjoint() * x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn khatri_rao_matches_vec_outer_product() {
        let a = CMatrix::from_column_slice(2, 1, &[c(1.0, 1.0), c(0.5, -2.0)]);
        let b = CMatrix::from_column_slice(2, 1, &[c(2.0, 0.0), c(0.0, 1.0)]);
        // vec(b a^T) in column-major order equals a (x) b.
        let kr = khatri_rao(&a, &b);
        let outer = &b * a.transpose();
        assert_eq!(kr.as_slice(), outer.as_slice());
    }

    #[test]
    fn inverse_square_root_squares_to_inverse() {
        let m = CMatrix::from_row_slice(2, 2, &[c(3.0, 0.0), c(1.0, 0.5), c(1.0, -0.5), c(2.0, 0.0)]);
        let s = hermitian_inv_sqrt(&m);
        let prod = &s * &s * &m;
        for r in 0..2 {
            for col in 0..2 {
                let want = if r == col { 1.0 } else { 0.0 };
                assert!((prod[(r, col)] - c(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn whitening_matches_explicit_kronecker() {
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.3, 0.2), c(0.3, -0.2), c(1.5, 0.0)]);
        let s = hermitian_inv_sqrt(&m);
        let x = CMatrix::from_fn(4, 2, |r, col| c(r as f64 + 1.0, col as f64 - 0.5 * r as f64));
        let kron = s.transpose().kronecker(&s);
        let want = &kron * &x;
        let got = whiten_vec_columns(&s, &x);
        assert!((want - got).norm() < 1e-12);
    }

    #[test]
    fn projection_removes_the_basis() {
        let basis = CMatrix::from_fn(4, 2, |r, col| c((r + col) as f64, (r * col) as f64));
        let p = project_out(&basis, &basis);
        assert!(p.norm() < 1e-10);
    }
}
