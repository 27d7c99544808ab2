//! Complex Schur decomposition `A = Q U Q^H` by Householder reduction to
//! Hessenberg form followed by implicitly shifted QR with Givens rotations.

use super::{ensure_finite, ensure_square, CMatrix, C64};
use crate::error::{Error, Result};
use crate::tol;

#[derive(Debug, Clone)]
pub struct Schur {
    /// Unitary factor.
    pub q: CMatrix,
    /// Upper-triangular factor; its diagonal carries the eigenvalues.
    pub u: CMatrix,
}

impl Schur {
    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        (0..self.dim()).map(|i| self.u[(i, i)]).collect()
    }

    pub fn reconstruct(&self) -> CMatrix {
        &self.q * &self.u * self.q.adjoint()
    }
}

/// Sweep budget per unit of dimension.
const SWEEPS_PER_DIM: usize = 100;

pub fn schur(a: &CMatrix) -> Result<Schur> {
    let budget = SWEEPS_PER_DIM * a.nrows().max(1);
    schur_with_budget(a, budget)
}

pub fn schur_with_budget(a: &CMatrix, budget: usize) -> Result<Schur> {
    let n = ensure_square(a)?;
    ensure_finite(a)?;
    let mut h = a.clone();
    let mut q = CMatrix::identity(n, n);
    hessenberg(&mut h, &mut q);
    let scale = a.norm();
    qr_iterate(&mut h, &mut q, scale, budget)?;
    for j in 0..n {
        for i in (j + 1)..n {
            h[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    Ok(Schur { q, u: h })
}

/// Reduce `h` to upper Hessenberg form in place, accumulating into `q`.
fn hessenberg(h: &mut CMatrix, q: &mut CMatrix) {
    let n = h.nrows();
    if n < 3 {
        return;
    }
    let mut v = vec![C64::new(0.0, 0.0); n];
    for k in 0..(n - 2) {
        let m = n - k - 1;
        let mut xnorm2 = 0.0;
        for i in 0..m {
            v[i] = h[(k + 1 + i, k)];
            xnorm2 += v[i].norm_sqr();
        }
        let xnorm = xnorm2.sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = v[0];
        let phase = if x0.norm() == 0.0 { C64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        v[0] -= alpha;
        let vnorm = v[..m].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v[..m].iter_mut() {
            *z /= vnorm;
        }
        // Rows k+1.. from the left: H <- (I - 2 v v^H) H.
        for j in k..n {
            let mut dot = C64::new(0.0, 0.0);
            for i in 0..m {
                dot += v[i].conj() * h[(k + 1 + i, j)];
            }
            let dot = dot * 2.0;
            for i in 0..m {
                h[(k + 1 + i, j)] -= v[i] * dot;
            }
        }
        // Columns k+1.. from the right, and the same for Q.
        for mat in [&mut *h, &mut *q] {
            for r in 0..n {
                let mut dot = C64::new(0.0, 0.0);
                for i in 0..m {
                    dot += mat[(r, k + 1 + i)] * v[i];
                }
                let dot = dot * 2.0;
                for i in 0..m {
                    mat[(r, k + 1 + i)] -= dot * v[i].conj();
                }
            }
        }
        h[(k + 1, k)] = alpha;
        for i in (k + 2)..n {
            h[(i, k)] = C64::new(0.0, 0.0);
        }
    }
}

/// Rotation `G = [[c, s], [-conj(s), c]]` with `G [x; y] = [r; 0]`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Givens {
    pub c: f64,
    pub s: C64,
}

impl Givens {
    pub fn zeroing(x: C64, y: C64) -> Self {
        let ax = x.norm();
        let ay = y.norm();
        let r = ax.hypot(ay);
        if r == 0.0 {
            return Givens { c: 1.0, s: C64::new(0.0, 0.0) };
        }
        if ax == 0.0 {
            return Givens { c: 0.0, s: y.conj() / ay };
        }
        let c = ax / r;
        let s = (x / ax) * y.conj() / r;
        Givens { c, s }
    }

    /// Apply `G` to rows `k, k+1` over columns `cols`.
    pub fn rotate_rows(&self, m: &mut CMatrix, k: usize, cols: std::ops::Range<usize>) {
        for j in cols {
            let a = m[(k, j)];
            let b = m[(k + 1, j)];
            m[(k, j)] = a * self.c + self.s * b;
            m[(k + 1, j)] = -self.s.conj() * a + b * self.c;
        }
    }

    /// Apply `G^H` from the right to columns `k, k+1` over rows `rows`.
    pub fn rotate_cols(&self, m: &mut CMatrix, k: usize, rows: std::ops::Range<usize>) {
        for i in rows {
            let a = m[(i, k)];
            let b = m[(i, k + 1)];
            m[(i, k)] = a * self.c + b * self.s.conj();
            m[(i, k + 1)] = -a * self.s + b * self.c;
        }
    }
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    let l1 = half_tr + root;
    let l2 = half_tr - root;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn qr_iterate(h: &mut CMatrix, q: &mut CMatrix, scale: f64, budget: usize) -> Result<()> {
    let n = h.nrows();
    if n < 2 {
        return Ok(());
    }
    let abs_floor = tol::DEFLATION * scale;
    let mut hi = n - 1;
    let mut its = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let local = f64::EPSILON * (h[(l - 1, l - 1)].norm() + h[(l, l)].norm());
            if sub <= abs_floor.max(local) {
                h[(l, l - 1)] = C64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            its = 0;
            continue;
        }
        its += 1;
        total += 1;
        if total > budget {
            let residual = (0..n - 1).map(|i| h[(i + 1, i)].norm()).fold(0.0, f64::max);
            return Err(Error::EigenIterationFailed { iterations: total, residual });
        }
        let shift = if its % 11 == 10 {
            // Exceptional shift to escape cycles.
            h[(hi, hi)] + C64::new(0.75, 0.25) * h[(hi, hi - 1)].norm()
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        for k in l..hi {
            let (x, y) = if k == l {
                (h[(l, l)] - shift, h[(l + 1, l)])
            } else {
                (h[(k, k - 1)], h[(k + 1, k - 1)])
            };
            let g = Givens::zeroing(x, y);
            let first_col = if k == l { l } else { k - 1 };
            g.rotate_rows(h, k, first_col..n);
            let last_row = (k + 2).min(hi);
            g.rotate_cols(h, k, 0..last_row + 1);
            g.rotate_cols(q, k, 0..n);
            if k > l {
                h[(k + 1, k - 1)] = C64::new(0.0, 0.0);
            }
        }
    }
    Ok(())
}

/// Reorder so that the eigenvalues accepted by `select` occupy the leading
/// block. Returns the reordered pair and the size of the leading block.
///
/// Uses the cluster floor `1e-7 * ||U||_F`.
pub fn reorder_schur(s: &Schur, select: impl Fn(C64) -> bool) -> Result<(Schur, usize)> {
    let floor = tol::CLUSTER * s.u.norm();
    reorder_schur_with_floor(s, select, floor)
}

pub fn reorder_schur_with_floor(
    s: &Schur,
    select: impl Fn(C64) -> bool,
    floor: f64,
) -> Result<(Schur, usize)> {
    let n = s.dim();
    let mut q = s.q.clone();
    let mut u = s.u.clone();
    let mut placed = 0usize;
    for k in 0..n {
        if !select(u[(k, k)]) {
            continue;
        }
        let mut pos = k;
        while pos > placed {
            swap_adjacent(&mut u, &mut q, pos - 1, floor)?;
            pos -= 1;
        }
        placed += 1;
    }
    Ok((Schur { q, u }, placed))
}

/// Exchange the diagonal entries at `k` and `k + 1` by a unitary similarity.
fn swap_adjacent(u: &mut CMatrix, q: &mut CMatrix, k: usize, floor: f64) -> Result<()> {
    let n = u.nrows();
    let a = u[(k, k)];
    let b = u[(k, k + 1)];
    let c = u[(k + 1, k + 1)];
    if (c - a).norm() < floor {
        return Err(Error::IllSeparatedCluster {
            a: format!("{:.6e}{:+.6e}i", a.re, a.im),
            b: format!("{:.6e}{:+.6e}i", c.re, c.im),
            floor,
        });
    }
    let g = Givens::zeroing(b, c - a);
    g.rotate_rows(u, k, k..n);
    g.rotate_cols(u, k, 0..k + 2);
    g.rotate_cols(q, k, 0..n);
    u[(k, k)] = c;
    u[(k + 1, k + 1)] = a;
    u[(k + 1, k)] = C64::new(0.0, 0.0);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, diag, identity, real_matrix};
    use crate::models::gaussian_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unitarity(q: &CMatrix) -> f64 {
        (q.adjoint() * q - identity(q.nrows())).norm()
    }

    fn sorted(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn identity_is_its_own_schur_form() {
        let s = schur(&identity(3)).unwrap();
        assert_eq!(s.eigenvalues(), vec![c64(1.0, 0.0); 3]);
        assert!((s.q.clone() - identity(3)).norm() == 0.0);
    }

    #[test]
    fn triangular_input_keeps_its_diagonal() {
        let a = real_matrix(&[&[1.0, 1.0], &[0.0, 2.0]]);
        let s = schur(&a).unwrap();
        let ev = sorted(s.eigenvalues());
        assert!((ev[0] - c64(1.0, 0.0)).norm() < 1e-14);
        assert!((ev[1] - c64(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn random_gaussian_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = gaussian_matrix(&mut rng, 8, 8, 1.0);
        let s = schur(&a).unwrap();
        assert!((s.reconstruct() - &a).norm() <= 1e-10 * 8.0 * a.norm());
        assert!(unitarity(&s.q) <= 1e-12);
        for j in 0..8 {
            for i in (j + 1)..8 {
                assert_eq!(s.u[(i, j)], c64(0.0, 0.0));
            }
        }
    }

    #[test]
    fn real_rotation_gets_complex_eigenvalues() {
        let a = real_matrix(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let s = schur(&a).unwrap();
        let ev = sorted(s.eigenvalues());
        assert!((ev[0] - c64(0.0, -1.0)).norm() < 1e-13);
        assert!((ev[1] - c64(0.0, 1.0)).norm() < 1e-13);
    }

    #[test]
    fn budget_exhaustion_reports_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = gaussian_matrix(&mut rng, 6, 6, 1.0);
        match schur_with_budget(&a, 1) {
            Err(Error::EigenIterationFailed { residual, .. }) => assert!(residual > 0.0),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn reorder_swaps_diagonal_pair() {
        let s = schur(&diag(&[c64(1.0, 0.0), c64(2.0, 0.0)])).unwrap();
        let (r, m) = reorder_schur(&s, |z| (z - c64(2.0, 0.0)).norm() < 0.5).unwrap();
        assert_eq!(m, 1);
        assert_eq!(r.eigenvalues(), vec![c64(2.0, 0.0), c64(1.0, 0.0)]);
        assert!((r.reconstruct() - diag(&[c64(1.0, 0.0), c64(2.0, 0.0)])).norm() < 1e-14);
    }

    #[test]
    fn reorder_moves_repeated_cluster_forward() {
        let a = diag(&[c64(2.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0)]);
        let s = schur(&a).unwrap();
        let (r, m) = reorder_schur(&s, |z| (z - c64(1.0, 0.0)).norm() < 0.5).unwrap();
        assert_eq!(m, 2);
        assert_eq!(r.u[(0, 0)], c64(1.0, 0.0));
        assert_eq!(r.u[(1, 1)], c64(1.0, 0.0));
        assert!((r.reconstruct() - a).norm() < 1e-14);
    }

    #[test]
    fn reorder_random_selection_preserves_spectrum() {
        // Well separated spectrum: conjugate a fixed diagonal by a random similarity.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d: Vec<C64> = (0..6).map(|k| c64(k as f64, 0.5 * k as f64)).collect();
        let sim = gaussian_matrix(&mut rng, 6, 6, 1.0) + identity(6) * c64(3.0, 0.0);
        let a = &sim * diag(&d) * sim.clone().try_inverse().unwrap();
        let s = schur(&a).unwrap();
        let chosen = [d[1], d[3], d[4]];
        let pick = |z: C64| chosen.iter().any(|c| (z - c).norm() < 1e-6);
        let (r, m) = reorder_schur(&s, pick).unwrap();
        assert_eq!(m, 3);
        let lead = sorted((0..3).map(|i| r.u[(i, i)]).collect());
        let expected = sorted(chosen.to_vec());
        for (x, y) in lead.iter().zip(&expected) {
            assert!((x - y).norm() < 1e-8);
        }
        assert!((r.reconstruct() - &a).norm() <= 1e-10 * 6.0 * a.norm());
        assert!(unitarity(&r.q) <= 1e-12);
    }

    #[test]
    fn reorder_rejects_ill_separated_swap() {
        let a = real_matrix(&[&[1.0, 1.0], &[0.0, 1.0 + 1e-12]]);
        let s = Schur { q: identity(2), u: a };
        let err = reorder_schur(&s, |z| z.re > 1.0 + 1e-13).unwrap_err();
        assert!(matches!(err, Error::IllSeparatedCluster { .. }));
    }
}
