//! Rank-revealing least squares on dense column blocks.
//!
//! Everything here goes through a thin SVD. A singular value counts as
//! nonzero when it exceeds `EPS * max(rows, cols) * sigma_max`.
//!
//! nalgebra's SVD can return factors that do not reproduce a tall
//! rank-deficient input (errors near 1e-4 on exactly aliased dummy columns),
//! so tall matrices are first reduced by a column-pivoted QR and the square
//! triangular factor is decomposed instead. Each decomposition is checked by
//! recomposition and retried on the transpose when it fails.

use nalgebra::{DMatrix, DVector};

/// Machine epsilon used by the rank criterion (2^-52).
pub const RANK_EPS: f64 = f64::EPSILON;

/// Threshold below which a singular value is treated as zero.
pub fn rank_tolerance(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    RANK_EPS * rows.max(cols) as f64 * sigma_max
}

/// Numerical rank of `m`.
pub fn rank(m: &DMatrix<f64>) -> usize {
    rank_relative_to(m, 0.0)
}

/// Numerical rank with the tolerance scaled by `max(σ_max(m), reference)`.
/// For a derived matrix such as a residual `(I - P) x`, passing the largest
/// singular value of `x` keeps rounding leftovers from counting as rank.
pub fn rank_relative_to(m: &DMatrix<f64>, reference: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let (_, sv) = left_singular(m);
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max).max(reference);
    if smax == 0.0 {
        return 0;
    }
    let tol = rank_tolerance(m.nrows(), m.ncols(), smax);
    sv.iter().filter(|&&s| s > tol).count()
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    left_singular(m).1.iter().cloned().fold(0.0, f64::max)
}

fn recomposes(svd: &nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>, m: &DMatrix<f64>) -> bool {
    let scale = m.norm().max(f64::MIN_POSITIVE);
    match svd.clone().recompose() {
        Ok(r) => (r - m).norm() <= 1e3 * f64::EPSILON * m.nrows().max(m.ncols()) as f64 * scale,
        Err(_) => false,
    }
}

/// Left singular vectors and singular values of a matrix with at least as
/// many rows as columns.
fn square_or_tall_svd(m: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let direct = m.clone().svd(true, true);
    if recomposes(&direct, m) {
        return (direct.u.expect("u requested"), direct.singular_values);
    }
    // U of m is V of mᵀ
    let t = m.transpose().svd(true, true);
    if recomposes(&t, &m.transpose()) {
        let u = t.v_t.expect("v requested").transpose();
        return (u, t.singular_values);
    }
    (direct.u.expect("u requested"), direct.singular_values)
}

/// Thin left singular vectors (`rows × min(rows, cols)`) and singular values.
fn left_singular(m: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let (rows, cols) = m.shape();
    if rows > cols {
        let qr = m.clone().col_piv_qr();
        let (q, r) = (qr.q(), qr.r());
        let (ur, sv) = square_or_tall_svd(&r);
        (q * ur, sv)
    } else {
        // mᵀ P = Q R, so m = P Rᵀ Qᵀ and the left factor of m is P times that of Rᵀ
        let qr = m.transpose().col_piv_qr();
        let rt = qr.r().transpose();
        let (mut u, sv) = square_or_tall_svd(&rt);
        qr.p().permute_rows(&mut u);
        (u, sv)
    }
}

/// Rank and residual sum of squares of the least-squares fit of `y` on `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit {
    pub rank: usize,
    pub sse: f64,
}

/// Fits `y` on the columns of `a`. The residual is the projection of `y`
/// onto the orthogonal complement of the numerical column space, so the
/// result does not depend on how that space is parameterized.
pub fn least_squares(a: &DMatrix<f64>, y: &DVector<f64>) -> Fit {
    let basis = column_basis(a);
    let residual = y - &basis * (basis.transpose() * y);
    Fit {
        rank: basis.ncols(),
        sse: residual.norm_squared(),
    }
}

/// Orthonormal basis (n × rank) of the numerical column space of `a`.
pub fn column_basis(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    if a.ncols() == 0 || n == 0 {
        return DMatrix::zeros(n, 0);
    }
    let (u, sv) = left_singular(a);
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    if smax == 0.0 {
        return DMatrix::zeros(n, 0);
    }
    let tol = rank_tolerance(a.nrows(), a.ncols(), smax);
    let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > tol).collect();
    let mut basis = DMatrix::zeros(n, keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        basis.set_column(dst, &u.column(src));
    }
    basis
}

/// `(I - P) x` where `P` projects onto the column space of `base`.
pub fn residualize(base: &DMatrix<f64>, x: &DMatrix<f64>) -> DMatrix<f64> {
    let q = column_basis(base);
    x - &q * (q.transpose() * x)
}

/// Concatenates column blocks that share a row count.
pub fn hstack(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows = blocks.first().map(|b| b.nrows()).unwrap_or(0);
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        debug_assert_eq!(b.nrows(), rows);
        out.view_mut((0, at), (rows, b.ncols())).copy_from(*b);
        at += b.ncols();
    }
    out
}
