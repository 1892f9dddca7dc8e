//! Small dense complex linear-algebra layer.
//!
//! Everything in this crate works with dense `DMatrix<Complex64>` backed by
//! nalgebra. This module collects the handful of numerical primitives the
//! rest of the library needs (Hermitian eigenvalue bounds, positive square
//! roots, orthonormal range bases, Kronecker products) together with a
//! JSON-friendly matrix encoding. Range bases use a relative singular-value
//! cutoff so that subspaces such as defect spaces are always represented by
//! explicit orthonormal columns.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Relative cutoff for rank decisions: singular values below
/// `RANK_REL_TOL * sigma_max` are treated as zero.
pub const RANK_REL_TOL: f64 = 1e-10;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

/// Hermitian part `(m + m*)/2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).map(|z| z * 0.5)
}

/// Largest singular value; `0` for matrices with an empty dimension.
pub fn op_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Frobenius norm.
pub fn fro_norm(m: &CMat) -> f64 {
    m.norm()
}

/// Largest entry magnitude; `0` for empty matrices.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// How far `m` is from being Hermitian, in Frobenius norm.
pub fn hermitian_defect(m: &CMat) -> f64 {
    (m - m.adjoint()).norm()
}

/// Smallest eigenvalue of the Hermitian part of `m`.
///
/// Used for positivity checks; callers symmetrize first when they need the
/// genuine spectrum. Returns `0.0` for an empty matrix (vacuous positivity).
pub fn min_eig_hermitian(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let h = hermitian_part(m);
    h.symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Positive square root of a Hermitian positive semidefinite matrix.
///
/// Negative eigenvalues produced by rounding are clamped to zero.
pub fn psd_sqrt(m: &CMat) -> CMat {
    if m.nrows() == 0 {
        return m.clone();
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let u = eig.eigenvectors;
    let mut d = CMat::zeros(u.ncols(), u.ncols());
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        d[(i, i)] = cr(lambda.max(0.0).sqrt());
    }
    &u * d * u.adjoint()
}

/// Orthonormal basis (as columns) of the range of a Hermitian PSD matrix,
/// taken from its eigenvectors with eigenvalue above `rel_tol * lambda_max`.
pub fn psd_range_basis(m: &CMat, rel_tol: f64) -> CMat {
    if m.nrows() == 0 {
        return zeros(0, 0);
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let lambda_max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let cut = rel_tol * lambda_max.max(1e-300);
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > cut)
        .collect();
    let mut out = zeros(m.nrows(), keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &eig.eigenvectors.column(i));
    }
    out
}

/// Orthonormal basis of the column space of an arbitrary matrix, from its
/// SVD with relative cutoff `rel_tol * sigma_max`.
pub fn range_basis(m: &CMat, rel_tol: f64) -> CMat {
    if m.nrows() == 0 || m.ncols() == 0 {
        return zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("svd with u requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = rel_tol * smax.max(1e-300);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > cut)
        .collect();
    let mut out = zeros(m.nrows(), keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &u.column(i));
    }
    out
}

/// Orthonormal basis of the null space (right singular vectors with
/// singular value below `rel_tol * sigma_max`, plus the dimensions SVD
/// does not reach when the matrix is wide).
pub fn null_space_basis(m: &CMat, rel_tol: f64) -> CMat {
    if m.ncols() == 0 {
        return zeros(0, 0);
    }
    if m.nrows() == 0 {
        return identity(m.ncols());
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("svd with v_t requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = rel_tol * smax.max(1e-300);
    let mut cols: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= cut)
        .collect();
    // Right singular vectors beyond the rank of the decomposition.
    cols.extend(svd.singular_values.len()..v_t.nrows());
    let v = v_t.adjoint(); // columns are right singular vectors
    let extra = m.ncols().saturating_sub(v.ncols());
    let mut out = zeros(m.ncols(), cols.len() + extra);
    for (j, &i) in cols.iter().enumerate() {
        out.set_column(j, &v.column(i));
    }
    // For a wide matrix nalgebra's thin SVD only produces ncols(v) = nrows(m)
    // right vectors; complete with an orthonormal complement if needed.
    if extra > 0 {
        let mut basis: Vec<CVec> = (0..cols.len()).map(|j| out.column(j).into_owned()).collect();
        let mut j = cols.len();
        'candidates: for k in 0..m.ncols() {
            if j >= out.ncols() {
                break;
            }
            let mut cand = CVec::zeros(m.ncols());
            cand[k] = cr(1.0);
            // project out existing v columns and accepted basis vectors
            for i in 0..v.ncols() {
                let col = v.column(i);
                let coef = col.dotc(&cand);
                cand -= col.into_owned() * coef;
            }
            for b in &basis {
                let coef = b.dotc(&cand);
                cand -= b.clone() * coef;
            }
            let nrm = cand.norm();
            if nrm > 1e-8 {
                cand /= cr(nrm);
                // must actually be in the null space
                if (m * &cand).norm() <= cut.max(1e-12) {
                    out.set_column(j, &cand);
                    basis.push(cand);
                    j += 1;
                }
            }
            if j >= out.ncols() {
                break 'candidates;
            }
        }
        out = out.columns(0, j).into_owned();
    }
    out
}

/// Moore-Penrose pseudoinverse with relative cutoff.
pub fn pinv(m: &CMat, rel_tol: f64) -> CMat {
    if m.nrows() == 0 || m.ncols() == 0 {
        return zeros(m.ncols(), m.nrows());
    }
    m.clone()
        .pseudo_inverse(rel_tol * op_norm(m).max(1e-300))
        .unwrap_or_else(|_| zeros(m.ncols(), m.nrows()))
}

/// Kronecker product `a (x) b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Select a submatrix by explicit row and column index lists.
pub fn select(m: &CMat, rows: &[usize], cols: &[usize]) -> CMat {
    CMat::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Stack blocks vertically; all blocks must share a column count.
pub fn vstack(blocks: &[&CMat]) -> CMat {
    if blocks.is_empty() {
        return zeros(0, 0);
    }
    let cols = blocks[0].ncols();
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack: column mismatch");
        out.view_mut((at, 0), (b.nrows(), cols)).copy_from(*b);
        at += b.nrows();
    }
    out
}

/// Stack blocks horizontally; all blocks must share a row count.
pub fn hstack(blocks: &[&CMat]) -> CMat {
    if blocks.is_empty() {
        return zeros(0, 0);
    }
    let rows = blocks[0].nrows();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack: row mismatch");
        out.view_mut((0, at), (rows, b.ncols())).copy_from(*b);
        at += b.ncols();
    }
    out
}

/// Block diagonal of the given blocks.
pub fn block_diag(blocks: &[&CMat]) -> CMat {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let (mut r, mut co) = (0, 0);
    for b in blocks {
        out.view_mut((r, co), (b.nrows(), b.ncols())).copy_from(*b);
        r += b.nrows();
        co += b.ncols();
    }
    out
}

pub fn all_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// JSON form of a complex matrix: row-major entries as `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMat) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        MatrixJson { rows: m.nrows(), cols: m.ncols(), data }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::ShapeMismatch(format!(
                "matrix payload has {} entries, expected {}x{}",
                self.data.len(),
                self.rows,
                self.cols
            )));
        }
        if self.data.iter().any(|e| !e[0].is_finite() || !e[1].is_finite()) {
            return Err(Error::InvalidArgument("matrix entries must be finite".into()));
        }
        let mut m = zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let e = self.data[i * self.cols + j];
                m[(i, j)] = c(e[0], e[1]);
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psd_sqrt_squares_back() {
        let a = CMat::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.5, 0.5), c(0.5, -0.5), c(1.0, 0.0)]);
        let p = &a * a.adjoint();
        let s = psd_sqrt(&p);
        assert!((&s * &s - &p).norm() < 1e-12);
        assert!(hermitian_defect(&s) < 1e-12);
    }

    #[test]
    fn range_and_null_dimensions_are_complementary() {
        // rank-1 matrix embedded in 3x3
        let v = CMat::from_row_slice(3, 1, &[cr(1.0), cr(2.0), cr(-1.0)]);
        let m = &v * v.adjoint();
        let r = range_basis(&m, RANK_REL_TOL);
        let nl = null_space_basis(&m, RANK_REL_TOL);
        assert_eq!(r.ncols(), 1);
        assert_eq!(nl.ncols(), 2);
        assert!((&m * &nl).norm() < 1e-10);
        // orthonormality
        assert!((r.adjoint() * &r - identity(1)).norm() < 1e-12);
        assert!((nl.adjoint() * &nl - identity(2)).norm() < 1e-12);
    }

    #[test]
    fn wide_null_space_is_complete() {
        // 1x3 row: null space has dimension 2
        let m = CMat::from_row_slice(1, 3, &[cr(1.0), cr(1.0), cr(1.0)]);
        let nl = null_space_basis(&m, RANK_REL_TOL);
        assert_eq!(nl.ncols(), 2);
        assert!((&m * &nl).norm() < 1e-10);
        assert!((nl.adjoint() * &nl - identity(2)).norm() < 1e-10);
    }

    #[test]
    fn matrix_json_round_trip_is_bit_exact() {
        let m = CMat::from_row_slice(
            2,
            2,
            &[c(0.1, -0.2), c(1.0 / 3.0, 0.0), c(f64::MIN_POSITIVE, 2e-308), c(-0.0, 7.25)],
        );
        let js = serde_json::to_string(&MatrixJson::from_matrix(&m)).unwrap();
        let back: MatrixJson = serde_json::from_str(&js).unwrap();
        let m2 = back.to_matrix().unwrap();
        for (a, b) in m.iter().zip(m2.iter()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }
}
