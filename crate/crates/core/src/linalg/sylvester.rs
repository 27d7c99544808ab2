//! Bartels-Stewart solver for `A X - X B = C`.

use super::{ensure_square, schur, CMatrix, C64};
use crate::error::{Error, Result};
use crate::tol;

/// Solve `A X - X B = C` with the default separation floor
/// `1e-7 * max(||A||_F, ||B||_F)`.
pub fn sylvester_solve(a: &CMatrix, b: &CMatrix, c: &CMatrix) -> Result<CMatrix> {
    let floor = tol::CLUSTER * a.norm().max(b.norm());
    sylvester_solve_with_floor(a, b, c, floor)
}

pub fn sylvester_solve_with_floor(a: &CMatrix, b: &CMatrix, c: &CMatrix, floor: f64) -> Result<CMatrix> {
    let n = ensure_square(a)?;
    let m = ensure_square(b)?;
    if c.shape() != (n, m) {
        return Err(Error::DimensionMismatch(format!(
            "C is {}x{}, expected {n}x{m}",
            c.nrows(),
            c.ncols()
        )));
    }
    let sa = schur(a)?;
    let sb = schur(b)?;
    let gap = spectral_gap(&sa.eigenvalues(), &sb.eigenvalues());
    if gap <= floor {
        return Err(Error::SylvesterIllConditioned { gap, floor });
    }
    let f = sa.q.adjoint() * c * &sb.q;
    let y = solve_triangular_sylvester(&sa.u, &sb.u, &f);
    Ok(&sa.q * y * sb.q.adjoint())
}

fn spectral_gap(ea: &[C64], eb: &[C64]) -> f64 {
    let mut gap = f64::INFINITY;
    for x in ea {
        for y in eb {
            gap = gap.min((x - y).norm());
        }
    }
    gap
}

/// Solve `U1 Y - Y U2 = F` for upper-triangular `U1` (n x n) and `U2` (m x m).
///
/// The caller guarantees disjoint diagonals.
pub fn solve_triangular_sylvester(u1: &CMatrix, u2: &CMatrix, f: &CMatrix) -> CMatrix {
    let n = u1.nrows();
    let m = u2.nrows();
    let mut y = CMatrix::zeros(n, m);
    let mut rhs = vec![C64::new(0.0, 0.0); n];
    for j in 0..m {
        for i in 0..n {
            let mut acc = f[(i, j)];
            for k in 0..j {
                acc += y[(i, k)] * u2[(k, j)];
            }
            rhs[i] = acc;
        }
        let shift = u2[(j, j)];
        for i in (0..n).rev() {
            let mut acc = rhs[i];
            for k in (i + 1)..n {
                acc -= u1[(i, k)] * y[(k, j)];
            }
            y[(i, j)] = acc / (u1[(i, i)] - shift);
        }
    }
    y
}
