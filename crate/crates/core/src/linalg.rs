//! Small linear-algebra helpers shared by the operator code.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

/// A 2×2 complex matrix in the (A, B) channel basis.
pub type Mat2 = Matrix2<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// 𝒦 = σ₃ + iσ₂ = [[1, 1], [−1, −1]]; nilpotent (𝒦² = 0).
pub fn k_matrix() -> Mat2 {
    Mat2::new(ONE, ONE, -ONE, -ONE)
}

pub fn mat2_identity() -> Mat2 {
    Mat2::identity()
}

pub fn det2(m: &Mat2) -> Complex64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

/// Largest entry modulus.
pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry modulus of a 2×2 matrix.
pub fn mat2_max_abs(m: &Mat2) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn mat2_to_dense(m: &Mat2) -> DMatrix<Complex64> {
    DMatrix::from_column_slice(2, 2, m.as_slice())
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `diag(m(p_j)) · K` for a stacked 2n×c matrix (rows: upper channel block, then lower).
pub fn nodewise_left(mults: &[Mat2], k: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = mults.len();
    assert_eq!(k.nrows(), 2 * n);
    let mut out = DMatrix::zeros(k.nrows(), k.ncols());
    for (j, m) in mults.iter().enumerate() {
        for c in 0..k.ncols() {
            let up = k[(j, c)];
            let lo = k[(n + j, c)];
            out[(j, c)] = m[(0, 0)] * up + m[(0, 1)] * lo;
            out[(n + j, c)] = m[(1, 0)] * up + m[(1, 1)] * lo;
        }
    }
    out
}

/// `K · diag(m(p_l))` for a stacked r×2n matrix.
pub fn nodewise_right(k: &DMatrix<Complex64>, mults: &[Mat2]) -> DMatrix<Complex64> {
    let n = mults.len();
    assert_eq!(k.ncols(), 2 * n);
    let mut out = DMatrix::zeros(k.nrows(), k.ncols());
    for (l, m) in mults.iter().enumerate() {
        for r in 0..k.nrows() {
            let a = k[(r, l)];
            let b = k[(r, n + l)];
            out[(r, l)] = a * m[(0, 0)] + b * m[(1, 0)];
            out[(r, n + l)] = a * m[(0, 1)] + b * m[(1, 1)];
        }
    }
    out
}

/// Estimated 2-norm condition number via singular values; infinite when singular.
pub fn condition_number(a: &DMatrix<Complex64>) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}
