//! Fuglede–Kadison log-determinants, the log-potential characterization of
//! joint Brown measures, modified spectral radii, and grid-regularized Brown
//! measure recovery from the Laplacian of the log-potential.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::measures::{brown, modified_spectral_radius};
use crate::report::Report;
use crate::spectral::{CommutingTuple, JointDecomposition};
use crate::tol::Tolerances;

/// Singular values at or below this fraction of the largest count as zero.
const SINGULAR_CUTOFF: f64 = 1e-14;

/// `|Σ α_i z_i - λ|` below this for some atom makes the identity ill-posed.
pub const ALPHA_ADMISSIBILITY: f64 = 1e-6;

/// `τ(log|A|) = (1/d) Σ log σ_i`, or `-∞` when `A` is numerically singular.
pub fn fk_log_det(a: &CMatrix) -> Result<f64> {
    let d = linalg::ensure_square(a)?;
    let sv = linalg::singular_values(a);
    let smax = sv.first().copied().unwrap_or(0.0);
    if sv.iter().any(|&s| s <= SINGULAR_CUTOFF * smax) || smax == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(sv.iter().map(|s| s.ln()).sum::<f64>() / d as f64)
}

/// `|τ(log|Σ α_i T_i - 1|) - ∫ log|Σ α_i z_i - 1| dμ|`.
pub fn characterization_gap(tuple: &CommutingTuple, dec: &JointDecomposition, alpha: &[C64]) -> Result<f64> {
    characterization_gap_at(tuple, dec, alpha, C64::new(1.0, 0.0))
}

/// The same identity with `-λ` in place of `-1`.
pub fn characterization_gap_at(
    tuple: &CommutingTuple,
    dec: &JointDecomposition,
    alpha: &[C64],
    lambda: C64,
) -> Result<f64> {
    if alpha.len() != tuple.arity() || dec.arity() != tuple.arity() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients for a {}-tuple",
            alpha.len(),
            tuple.arity()
        )));
    }
    let mu = brown(dec);
    let mut rhs = 0.0;
    for atom in mu.atoms() {
        let v: C64 = alpha.iter().zip(&atom.point).map(|(a, z)| a * z).sum::<C64>() - lambda;
        if v.norm() < ALPHA_ADMISSIBILITY {
            return Err(Error::IllPosedAlpha { distance: v.norm() });
        }
        rhs += atom.weight * v.norm().ln();
    }
    let d = tuple.dim();
    let mut m = CMatrix::identity(d, d) * (-lambda);
    for (a, t) in alpha.iter().zip(tuple.mats()) {
        m += t * *a;
    }
    let lhs = fk_log_det(&m)?;
    Ok((lhs - rhs).abs())
}

/// `r'(ST) <= r'(S) r'(T)` and `r'(S+T) <= r'(S) + r'(T)` with the radii read
/// off the Brown measures of fresh decompositions.
pub fn verify_radius_inequalities(s: &CMatrix, t: &CMatrix) -> Result<Report> {
    verify_radius_inequalities_with(s, t, &Tolerances::default())
}

pub fn verify_radius_inequalities_with(s: &CMatrix, t: &CMatrix, tol: &Tolerances) -> Result<Report> {
    CommutingTuple::with_tol(vec![s.clone(), t.clone()], tol.commute)?;
    let radius = |m: &CMatrix| -> Result<f64> {
        let dec = JointDecomposition::compute_with(&CommutingTuple::single(m.clone())?, tol)?;
        modified_spectral_radius(&brown(&dec))
    };
    let (rs, rt) = (radius(s)?, radius(t)?);
    let r_prod = radius(&(s * t))?;
    let r_sum = radius(&(s + t))?;
    let mut report = Report::new("spectral radii");
    let slack = |scale: f64| tol.radius_slack * scale.max(1.0);
    report.check_le("r'(ST) - r'(S) r'(T)", r_prod - rs * rt, slack(rs * rt));
    report.check_le("r'(S+T) - r'(S) - r'(T)", r_sum - rs - rt, slack(rs + rt));
    report.check_le("r'(S) - ||S||", rs - linalg::spectral_norm(s), slack(rs));
    Ok(report)
}

/// Regularized log-potential `(1/2d) log det((T-λ)^H (T-λ) + ε^2)`.
pub fn log_potential(t: &CMatrix, lambda: C64, eps: f64) -> Result<f64> {
    let d = linalg::ensure_square(t)?;
    if !(eps > 0.0) {
        return Err(Error::GridTooSmall(format!("regularization must be positive, got {eps}")));
    }
    let shifted = t - CMatrix::identity(d, d) * lambda;
    let sv = linalg::singular_values(&shifted);
    Ok(sv.iter().map(|s| (s * s + eps * eps).ln()).sum::<f64>() / (2.0 * d as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

pub const DEFAULT_CELLS: usize = 200;

impl GridSpec {
    pub fn centered(radius: f64, nx: usize, ny: usize) -> Self {
        GridSpec { x_min: -radius, x_max: radius, y_min: -radius, y_max: radius, nx, ny }
    }

    /// The centred square of radius `||T|| + 3ε + max(0.25, ||T|| / 10)`.
    pub fn default_for(t: &CMatrix, eps: f64) -> Self {
        let norm = linalg::spectral_norm(t);
        Self::centered(norm + 3.0 * eps + (0.1 * norm).max(0.25), DEFAULT_CELLS, DEFAULT_CELLS)
    }

    fn hx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    fn hy(&self) -> f64 {
        (self.y_max - self.y_min) / self.ny as f64
    }

    fn validate(&self) -> Result<()> {
        let ok = self.nx > 0
            && self.ny > 0
            && self.x_max > self.x_min
            && self.y_max > self.y_min
            && [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite());
        if !ok {
            return Err(Error::GridTooSmall(format!("degenerate grid {self:?}")));
        }
        Ok(())
    }
}

/// `ε = 1e-3 max(||T||, 1)`.
pub fn default_epsilon(t: &CMatrix) -> f64 {
    1e-3 * linalg::spectral_norm(t).max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridDensity {
    pub spec: GridSpec,
    pub epsilon: f64,
    /// Row-major, `ny` rows of `nx` cells, row 0 at `y_min`.
    pub cell_mass: Vec<f64>,
    pub total_mass: f64,
    /// Total negative mass as a fraction of the total.
    pub leak: f64,
}

impl GridDensity {
    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        let s = &self.spec;
        (s.x_min + (i as f64 + 0.5) * s.hx(), s.y_min + (j as f64 + 0.5) * s.hy())
    }

    pub fn mass(&self, i: usize, j: usize) -> f64 {
        self.cell_mass[j * self.spec.nx + i]
    }

    /// Mass of the cells whose centre satisfies `pred`.
    pub fn mass_where(&self, pred: impl Fn(C64) -> bool) -> f64 {
        let mut total = 0.0;
        for j in 0..self.spec.ny {
            for i in 0..self.spec.nx {
                let (x, y) = self.cell_center(i, j);
                if pred(C64::new(x, y)) {
                    total += self.mass(i, j);
                }
            }
        }
        total
    }

    /// Mass of cells with centre within `r` of `c`.
    pub fn mass_near(&self, c: C64, r: f64) -> f64 {
        self.mass_where(|z| (z - c).norm() <= r)
    }

    pub fn min_mass(&self) -> f64 {
        self.cell_mass.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,mass\n");
        for j in 0..self.spec.ny {
            for i in 0..self.spec.nx {
                let (x, y) = self.cell_center(i, j);
                let _ = writeln!(out, "{x},{y},{}", self.mass(i, j));
            }
        }
        out
    }

    /// Binary P6 heatmap, one pixel per cell, top row at `y_max`.
    ///
    /// Colour map: mass is clamped below at 0, divided by the largest cell
    /// mass, square-rooted, and interpolated linearly through black, dark
    /// blue, red, yellow and white at 0, 0.25, 0.5, 0.75 and 1.
    pub fn to_ppm(&self) -> Vec<u8> {
        const STOPS: [[f64; 3]; 5] =
            [[0.0, 0.0, 0.0], [20.0, 30.0, 140.0], [200.0, 30.0, 40.0], [250.0, 220.0, 40.0], [255.0, 255.0, 255.0]];
        let (nx, ny) = (self.spec.nx, self.spec.ny);
        let peak = self.cell_mass.iter().copied().fold(0.0, f64::max);
        let mut out = format!("P6\n{nx} {ny}\n255\n").into_bytes();
        out.reserve(3 * nx * ny);
        for j in (0..ny).rev() {
            for i in 0..nx {
                let v = if peak > 0.0 { (self.mass(i, j).max(0.0) / peak).sqrt() } else { 0.0 };
                let x = v * 4.0;
                let k = (x.floor() as usize).min(3);
                let f = x - k as f64;
                for c in 0..3 {
                    let val = STOPS[k][c] + f * (STOPS[k + 1][c] - STOPS[k][c]);
                    out.push(val.round().clamp(0.0, 255.0) as u8);
                }
            }
        }
        out
    }
}

/// Brown measure of `t` on a grid: `(1/2π)` times the five-point Laplacian of
/// the `ε`-regularized log-potential, times the cell area.
///
/// The potential is evaluated at cell centres and on a one-cell halo. Each
/// cell's mass depends only on its own five evaluations.
pub fn grid_brown(t: &CMatrix, spec: &GridSpec, eps: f64) -> Result<GridDensity> {
    linalg::ensure_square(t)?;
    linalg::ensure_finite(t)?;
    spec.validate()?;
    if !(eps > 0.0) {
        return Err(Error::GridTooSmall(format!("regularization must be positive, got {eps}")));
    }
    let (hx, hy) = (spec.hx(), spec.hy());
    let guard_x = 3.0 * eps + 2.0 * hx;
    let guard_y = 3.0 * eps + 2.0 * hy;
    for z in linalg::schur(t)?.eigenvalues() {
        if z.re < spec.x_min + guard_x || z.re > spec.x_max - guard_x || z.im < spec.y_min + guard_y || z.im > spec.y_max - guard_y {
            return Err(Error::GridTooSmall(format!(
                "eigenvalue {:.6}{:+.6}i is not inside the grid by 3*eps plus two cells",
                z.re, z.im
            )));
        }
    }

    let evaluator = PotentialEvaluator::new(t, eps);
    let (wx, wy) = (spec.nx + 2, spec.ny + 2);
    let mut phi = vec![0.0; wx * wy];
    for jj in 0..wy {
        let y = spec.y_min + (jj as f64 - 0.5) * hy;
        for ii in 0..wx {
            let x = spec.x_min + (ii as f64 - 0.5) * hx;
            phi[jj * wx + ii] = evaluator.eval(C64::new(x, y));
        }
    }

    let inv_2pi = 1.0 / (2.0 * std::f64::consts::PI);
    let (ax, ay) = (hy / hx, hx / hy);
    let mut cell_mass = vec![0.0; spec.nx * spec.ny];
    for j in 0..spec.ny {
        for i in 0..spec.nx {
            let c = (j + 1) * wx + (i + 1);
            let lap = ax * (phi[c - 1] + phi[c + 1] - 2.0 * phi[c]) + ay * (phi[c - wx] + phi[c + wx] - 2.0 * phi[c]);
            cell_mass[j * spec.nx + i] = inv_2pi * lap;
        }
    }
    let total_mass: f64 = cell_mass.iter().sum();
    let negative: f64 = cell_mass.iter().filter(|m| **m < 0.0).map(|m| -m).sum();
    let leak = if total_mass > 0.0 { negative / total_mass } else { f64::INFINITY };
    Ok(GridDensity { spec: *spec, epsilon: eps, cell_mass, total_mass, leak })
}

/// Evaluates the regularized log-potential at many points, sharing `T^H T`.
struct PotentialEvaluator<'a> {
    t: &'a CMatrix,
    d: usize,
    eps: f64,
    /// Lower triangle of `T^H T`, row-major split into real and imaginary parts.
    gram_re: Vec<f64>,
    gram_im: Vec<f64>,
    ill_scaled: bool,
}

impl<'a> PotentialEvaluator<'a> {
    fn new(t: &'a CMatrix, eps: f64) -> Self {
        let d = t.nrows();
        let g = t.adjoint() * t;
        let mut gram_re = vec![0.0; d * d];
        let mut gram_im = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..=i {
                gram_re[i * d + j] = g[(i, j)].re;
                gram_im[i * d + j] = g[(i, j)].im;
            }
        }
        let scale = linalg::frobenius(t).powi(2).max(1.0);
        let ill_scaled = eps * eps < 1e3 * f64::EPSILON * scale;
        PotentialEvaluator { t, d, eps, gram_re, gram_im, ill_scaled }
    }

    fn eval(&self, lambda: C64) -> f64 {
        if self.ill_scaled || self.d <= 4 {
            return self.eval_svd(lambda);
        }
        self.eval_cholesky(lambda).unwrap_or_else(|| self.eval_svd(lambda))
    }

    fn eval_svd(&self, lambda: C64) -> f64 {
        log_potential(self.t, lambda, self.eps).unwrap_or(f64::NAN)
    }

    /// `(T-λ)^H (T-λ) + ε^2 = G - λ̄ T - λ T^H + (|λ|^2 + ε^2)`, factored by a
    /// row-oriented Cholesky on split real/imaginary storage.
    fn eval_cholesky(&self, lambda: C64) -> Option<f64> {
        let d = self.d;
        let mut lr = self.gram_re.clone();
        let mut li = self.gram_im.clone();
        let lc = lambda.conj();
        let shift = lambda.norm_sqr() + self.eps * self.eps;
        for i in 0..d {
            for j in 0..=i {
                let v = lc * self.t[(i, j)] + lambda * self.t[(j, i)].conj();
                lr[i * d + j] -= v.re;
                li[i * d + j] -= v.im;
            }
            lr[i * d + i] += shift;
        }
        let mut logdet = 0.0;
        for i in 0..d {
            for j in 0..=i {
                let (ri, rj) = (i * d, j * d);
                let (mut sr, mut si) = (lr[ri + j], li[ri + j]);
                let (ar, ai) = (&lr[ri..ri + j], &li[ri..ri + j]);
                let (br, bi) = (&lr[rj..rj + j], &li[rj..rj + j]);
                // s -= Σ_k L[i,k] conj(L[j,k])
                let (acc_r, acc_i) = conj_dot(ar, ai, br, bi);
                sr -= acc_r;
                si -= acc_i;
                if i == j {
                    if !(sr > 0.0) {
                        return None;
                    }
                    let l = sr.sqrt();
                    lr[ri + i] = l;
                    li[ri + i] = 0.0;
                    logdet += 2.0 * l.ln();
                } else {
                    let djj = lr[rj + j];
                    lr[ri + j] = sr / djj;
                    li[ri + j] = si / djj;
                }
            }
        }
        Some(logdet / (2.0 * d as f64))
    }
}

/// `Σ_k a_k conj(b_k)` on split storage, in eight independent lanes so the
/// loop vectorizes. The lane layout is fixed, so results do not depend on the
/// caller.
#[inline]
fn conj_dot(ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64]) -> (f64, f64) {
    const LANES: usize = 8;
    let n = ar.len();
    let split = n - n % LANES;
    let mut re = [0.0; LANES];
    let mut im = [0.0; LANES];
    for (((xr, xi), yr), yi) in ar[..split]
        .chunks_exact(LANES)
        .zip(ai[..split].chunks_exact(LANES))
        .zip(br[..split].chunks_exact(LANES))
        .zip(bi[..split].chunks_exact(LANES))
    {
        for l in 0..LANES {
            re[l] += xr[l] * yr[l] + xi[l] * yi[l];
            im[l] += xi[l] * yr[l] - xr[l] * yi[l];
        }
    }
    let mut sr: f64 = re.iter().sum();
    let mut si: f64 = im.iter().sum();
    for k in split..n {
        sr += ar[k] * br[k] + ai[k] * bi[k];
        si += ai[k] * br[k] - ar[k] * bi[k];
    }
    (sr, si)
}
