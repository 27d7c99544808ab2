//! One-sided Jacobi SVD.
//!
//! Used instead of the bidiagonal solver that ships with nalgebra, which loses
//! accuracy on complex matrices with repeated singular values (projector
//! complements, frames of nearly coincident subspaces).

use super::{CMatrix, C64};

const MAX_SWEEPS: usize = 80;

/// Thin SVD `A = U diag(s) V^H` with `s` descending and `r = min(m, n)` columns
/// in `U` and `V`. Columns of `U` belonging to a zero singular value are zero.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

pub fn svd(a: &CMatrix) -> Svd {
    let (m, n) = a.shape();
    if m < n {
        let t = svd(&a.adjoint());
        return Svd { u: t.v, s: t.s, v: t.u };
    }
    let mut w: Vec<Vec<C64>> = (0..n).map(|j| a.column(j).iter().copied().collect()).collect();
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }).collect())
        .collect();
    let mut norms: Vec<f64> = w.iter().map(|c| norm_sqr(c)).collect();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (alpha, beta) = (norms[p], norms[q]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = dot(&w[p], &w[q]);
                let g = gamma.norm();
                if g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s, phase);
                rotate(&mut v, p, q, c, s, phase);
                norms[p] = norm_sqr(&w[p]);
                norms[q] = norm_sqr(&w[q]);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let s: Vec<f64> = order.iter().map(|&j| norms[j].sqrt()).collect();
    let u = CMatrix::from_fn(m, n, |i, k| {
        let j = order[k];
        if s[k] > 0.0 {
            w[j][i] / s[k]
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let v = CMatrix::from_fn(n, n, |i, k| v[order[k]][i]);
    Svd { u, s, v }
}

fn norm_sqr(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

/// `x^H y`.
fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Columns `p, q` ← `[x_p, e^{-iφ} x_q] [[c, s], [-s, c]]`, with `phase = e^{iφ}`.
fn rotate(cols: &mut [Vec<C64>], p: usize, q: usize, c: f64, s: f64, phase: C64) {
    let conj_phase = phase.conj();
    let (left, right) = cols.split_at_mut(q);
    let (xp, xq) = (&mut left[p], &mut right[0]);
    for (a, b) in xp.iter_mut().zip(xq.iter_mut()) {
        let bq = *b * conj_phase;
        let ap = *a;
        *a = ap * c - bq * s;
        *b = ap * s + bq * c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{gaussian_matrix, rng_from_seed};

    fn reconstruct(f: &Svd) -> CMatrix {
        let sigma = CMatrix::from_fn(f.s.len(), f.s.len(), |i, j| {
            if i == j {
                C64::new(f.s[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        &f.u * sigma * f.v.adjoint()
    }

    #[test]
    fn reconstructs_rectangular_matrices() {
        let mut rng = rng_from_seed(1);
        for (m, n) in [(5, 3), (3, 5), (8, 8), (1, 4)] {
            let a = gaussian_matrix(&mut rng, m, n, 1.0);
            let f = svd(&a);
            assert!((reconstruct(&f) - &a).norm() < 1e-12 * a.norm());
            assert!(f.s.windows(2).all(|w| w[0] >= w[1]));
            let r = f.s.len();
            assert!((f.v.adjoint() * &f.v - CMatrix::identity(r, r)).norm() < 1e-12);
        }
    }

    #[test]
    fn repeated_singular_values_of_a_projector_complement() {
        let mut rng = rng_from_seed(2);
        for _ in 0..200 {
            let a = gaussian_matrix(&mut rng, 6, 3, 1.0);
            let q = a.qr().q();
            let m = CMatrix::identity(6, 6) - &q * q.adjoint();
            let f = svd(&m);
            assert!((reconstruct(&f) - &m).norm() < 1e-12);
            let top = f.u.columns(0, 3);
            assert!((q.adjoint() * top).norm() < 1e-12);
        }
    }
}
