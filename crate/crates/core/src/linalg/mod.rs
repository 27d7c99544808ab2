//! Dense complex linear algebra: Schur form and reordering, Sylvester solves,
//! and the lattice of subspaces of `C^d`.

mod json;
mod schur;
mod subspace;
mod svd;
mod sylvester;

pub use json::MatrixJson;
pub use schur::{reorder_schur, reorder_schur_with_floor, schur, schur_with_budget, Schur};
pub use subspace::{hstack, select_columns, Subspace};
pub use svd::{svd, Svd};
pub use sylvester::{solve_triangular_sylvester, sylvester_solve, sylvester_solve_with_floor};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn ensure_square(a: &CMatrix) -> Result<usize> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    if a.nrows() > tol::MAX_DIM {
        return Err(Error::TooLarge { dim: a.nrows(), max: tol::MAX_DIM });
    }
    Ok(a.nrows())
}

pub fn ensure_finite(a: &CMatrix) -> Result<()> {
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let z = a[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Build a matrix from row-major entries.
pub fn from_rows(rows: &[Vec<C64>]) -> Result<CMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch("ragged rows".into()));
    }
    let m = CMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]);
    ensure_finite(&m)?;
    Ok(m)
}

/// Real-valued convenience constructor, mostly for tests.
pub fn real_matrix(rows: &[&[f64]]) -> CMatrix {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    CMatrix::from_fn(nrows, ncols, |i, j| c64(rows[i][j], 0.0))
}

pub fn diag(entries: &[C64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(entries))
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.norm()
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    svd(a).s
}

pub fn spectral_norm(a: &CMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Condition number in the spectral norm; `inf` for singular input.
pub fn condition_number(a: &CMatrix) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (None, _) | (_, None) => 1.0,
        (Some(&max), Some(&min)) if min > 0.0 => max / min,
        _ => f64::INFINITY,
    }
}

pub fn commutator_norm(a: &CMatrix, b: &CMatrix) -> f64 {
    (a * b - b * a).norm()
}

/// Kronecker product `A (x) B`.
pub fn kronecker(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let rows = a.nrows() * b.nrows();
    let cols = a.ncols() * b.ncols();
    if rows > tol::MAX_DIM || cols > tol::MAX_DIM {
        return Err(Error::TooLarge { dim: rows.max(cols), max: tol::MAX_DIM });
    }
    Ok(a.kronecker(b))
}

/// Inverse via LU; fails on a numerically singular input.
pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    ensure_square(a)?;
    a.clone()
        .try_inverse()
        .ok_or_else(|| Error::DimensionMismatch("matrix is singular".into()))
}

pub fn fmt_point(p: &[C64]) -> String {
    let parts: Vec<String> = p.iter().map(|z| format!("{:.6}{:+.6}i", z.re, z.im)).collect();
    format!("({})", parts.join(", "))
}
