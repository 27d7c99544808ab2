//! Seeded random test ensembles, most of them with an exact joint-spectrum
//! oracle.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::measures::{AtomicMeasure, Polynomial};

/// Minimum distance between palette values used for diagonal entries.
pub const PALETTE_SEPARATION: f64 = 0.25;

/// The seeded generator used by every model.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries i.i.d. complex normal with `E|z|^2 = sigma^2`.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, sigma: f64) -> CMatrix {
    let s = sigma / std::f64::consts::SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(s * re, s * im)
    })
}

/// Haar-distributed unitary (QR of a Gaussian with the phase of `R` removed).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let qr = gaussian_matrix(rng, d, d, 1.0).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `Q1 diag(sigma) Q2` with singular values log-spaced on `[1, cond]`.
pub fn similarity<R: Rng + ?Sized>(rng: &mut R, d: usize, cond: f64) -> CMatrix {
    let q1 = random_unitary(rng, d);
    let q2 = random_unitary(rng, d);
    let sigma: Vec<C64> = (0..d)
        .map(|k| {
            let t = if d > 1 { k as f64 / (d - 1) as f64 } else { 0.0 };
            C64::new(cond.powf(t), 0.0)
        })
        .collect();
    q1 * linalg::diag(&sigma) * q2
}

/// `k` complex values in the disk of radius `radius`, pairwise at least
/// [`PALETTE_SEPARATION`] apart.
pub fn palette<R: Rng + ?Sized>(rng: &mut R, k: usize, radius: f64) -> Vec<C64> {
    let mut out: Vec<C64> = Vec::with_capacity(k);
    let mut attempts = 0usize;
    while out.len() < k {
        attempts += 1;
        let r = radius * rng.random::<f64>().sqrt();
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let z = C64::from_polar(r, theta);
        // Past a few thousand rejections the disk is full; widen it.
        let sep = if attempts > 5000 { PALETTE_SEPARATION * 0.5 } else { PALETTE_SEPARATION };
        if out.iter().all(|w| (w - z).norm() >= sep) {
            out.push(z);
        }
    }
    out
}

/// A random normal matrix `U diag(lambda) U^H` and its eigenvalues.
pub fn random_normal<R: Rng + ?Sized>(rng: &mut R, d: usize) -> (CMatrix, Vec<C64>) {
    let k = rng.random_range(1..=d);
    let pal = palette(rng, k, 2.0);
    let eigs: Vec<C64> = (0..d).map(|_| pal[rng.random_range(0..k)]).collect();
    let u = random_unitary(rng, d);
    (&u * linalg::diag(&eigs) * u.adjoint(), eigs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Ginibre {
        d: usize,
        seed: u64,
    },
    ConjugatedDiagonal {
        d: usize,
        n: usize,
        seed: u64,
        #[serde(default = "default_conditioning")]
        conditioning: f64,
    },
    /// `T_i = p_i(J)` for a Jordan matrix `J` (blocks of size at most 2) at the
    /// given base eigenvalues, conjugated by a similarity of condition
    /// `conditioning`. A missing layout is drawn from a palette.
    PolyOfJordan {
        d: usize,
        polynomials: Vec<Polynomial>,
        #[serde(default)]
        layout: Vec<C64>,
        seed: u64,
        #[serde(default = "one")]
        conditioning: f64,
    },
    /// `(S ⊗ 1, 1 ⊗ T)` for conjugated-diagonal `S` (d1 x d1) and `T` (d2 x d2).
    KroneckerPair {
        d1: usize,
        d2: usize,
        seed: u64,
    },
}

fn default_conditioning() -> f64 {
    10.0
}

fn one() -> f64 {
    1.0
}

/// Upper bound on the similarity condition number a model may request.
pub const MAX_CONDITIONING: f64 = 1e3;

#[derive(Debug, Clone)]
pub struct Model {
    pub mats: Vec<CMatrix>,
    /// Exact joint Brown measure, when the construction knows it.
    pub oracle: Option<AtomicMeasure>,
    /// Factor matrices of a Kronecker pair.
    pub factors: Vec<CMatrix>,
}

impl ModelSpec {
    pub fn generate(&self) -> Result<Model> {
        match self {
            ModelSpec::Ginibre { d, seed } => {
                check_dim(*d)?;
                let mut rng = rng_from_seed(*seed);
                let g = gaussian_matrix(&mut rng, *d, *d, 1.0 / (*d as f64).sqrt());
                Ok(Model { mats: vec![g], oracle: None, factors: Vec::new() })
            }
            ModelSpec::ConjugatedDiagonal { d, n, seed, conditioning } => {
                check_dim(*d)?;
                check_conditioning(*conditioning)?;
                if *n == 0 {
                    return Err(Error::InvalidModel("a tuple needs at least one operator".into()));
                }
                let mut rng = rng_from_seed(*seed);
                let (mats, oracle) = conjugated_diagonal(&mut rng, *d, *n, *conditioning)?;
                Ok(Model { mats, oracle: Some(oracle), factors: Vec::new() })
            }
            ModelSpec::PolyOfJordan { d, polynomials, layout, seed, conditioning } => {
                check_dim(*d)?;
                check_conditioning(*conditioning)?;
                let mut rng = rng_from_seed(*seed);
                poly_of_jordan(&mut rng, *d, polynomials, layout, *conditioning)
            }
            ModelSpec::KroneckerPair { d1, d2, seed } => {
                check_dim(*d1)?;
                check_dim(*d2)?;
                check_dim(d1 * d2)?;
                let mut rng = rng_from_seed(*seed);
                let (s, mu) = conjugated_diagonal(&mut rng, *d1, 1, 10.0)?;
                let (t, nu) = conjugated_diagonal(&mut rng, *d2, 1, 10.0)?;
                let (s, t) = (s.into_iter().next().unwrap(), t.into_iter().next().unwrap());
                let a = linalg::kronecker(&s, &linalg::identity(*d2))?;
                let b = linalg::kronecker(&linalg::identity(*d1), &t)?;
                Ok(Model {
                    mats: vec![a, b],
                    oracle: Some(crate::measures::product_measure(&mu, &nu)),
                    factors: vec![s, t],
                })
            }
        }
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 || d > crate::tol::MAX_DIM {
        return Err(Error::InvalidModel(format!("dimension {d} outside 1..={}", crate::tol::MAX_DIM)));
    }
    Ok(())
}

fn check_conditioning(c: f64) -> Result<()> {
    if !(1.0..=MAX_CONDITIONING).contains(&c) {
        return Err(Error::InvalidModel(format!("conditioning {c} outside [1, {MAX_CONDITIONING}]")));
    }
    Ok(())
}

/// `T_i = S D_i S^{-1}` with palette-valued diagonals and the exact joint measure.
pub fn conjugated_diagonal<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    n: usize,
    conditioning: f64,
) -> Result<(Vec<CMatrix>, AtomicMeasure)> {
    let s = similarity(rng, d, conditioning);
    let s_inv = linalg::inverse(&s)?;
    let k_max = ((d as f64).sqrt().ceil() as usize).max(2).min(d.max(1));
    let mut diags: Vec<Vec<C64>> = Vec::with_capacity(n);
    for _ in 0..n {
        let k = rng.random_range(1..=k_max);
        let pal = palette(rng, k, 2.0);
        diags.push((0..d).map(|_| pal[rng.random_range(0..k)]).collect());
    }
    let mats = diags.iter().map(|dg| &s * linalg::diag(dg) * &s_inv).collect();
    let w = 1.0 / d as f64;
    let oracle = AtomicMeasure::from_pairs(n, (0..d).map(|j| (diags.iter().map(|dg| dg[j]).collect(), w)))?;
    Ok((mats, oracle))
}

fn poly_of_jordan<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    polys: &[Polynomial],
    layout: &[C64],
    conditioning: f64,
) -> Result<Model> {
    if polys.is_empty() {
        return Err(Error::InvalidModel("poly_of_jordan needs at least one polynomial".into()));
    }
    if let Some(p) = polys.iter().find(|p| p.nvars != 1) {
        return Err(Error::InvalidModel(format!("polynomials must be univariate, got {} variables", p.nvars)));
    }
    let base = if layout.is_empty() {
        let k = rng.random_range(1..=d.min(4));
        palette(rng, k, 1.5)
    } else {
        layout.to_vec()
    };
    // Block sizes 1 or 2, eigenvalues cycling through the layout.
    let mut j = CMatrix::zeros(d, d);
    let mut blocks: Vec<(C64, usize)> = Vec::new();
    let mut pos = 0;
    let mut which = 0;
    while pos < d {
        let size = if pos + 1 < d && rng.random_bool(0.5) { 2 } else { 1 };
        let lambda = base[which % base.len()];
        for i in pos..pos + size {
            j[(i, i)] = lambda;
        }
        if size == 2 {
            j[(pos, pos + 1)] = C64::new(1.0, 0.0);
        }
        blocks.push((lambda, size));
        pos += size;
        which += 1;
    }
    let s = if conditioning == 1.0 { random_unitary(rng, d) } else { similarity(rng, d, conditioning) };
    let s_inv = linalg::inverse(&s)?;
    let mut mats = Vec::with_capacity(polys.len());
    for p in polys {
        let pj = p.eval_matrices(std::slice::from_ref(&j))?;
        mats.push(&s * pj * &s_inv);
    }
    let w = 1.0 / d as f64;
    let mut pairs = Vec::new();
    for (lambda, size) in blocks {
        let point: Vec<C64> = polys.iter().map(|p| p.eval(&[lambda])).collect::<Result<_>>()?;
        pairs.push((point, w * size as f64));
    }
    let oracle = AtomicMeasure::from_pairs(polys.len(), pairs)?;
    Ok(Model { mats, oracle: Some(oracle), factors: Vec::new() })
}
