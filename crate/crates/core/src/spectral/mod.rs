//! Joint spectral decomposition of commuting tuples, Riesz idempotents of
//! regions, and spectral subspaces.

mod verify;

pub use verify::{
    verify_box_formula, verify_lattice_identities, verify_maximality, verify_polynomial_invariance,
    verify_restriction_identity, verify_sigma_additivity,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::idempotents::{Idempotent, TraceValue};
use crate::linalg::{self, CMatrix, MatrixJson, Schur, Subspace, C64};
use crate::regions::Region;
use crate::tol::Tolerances;

/// A validated tuple of pairwise commuting square matrices.
#[derive(Debug, Clone)]
pub struct CommutingTuple {
    mats: Vec<CMatrix>,
    commutator_bound: f64,
}

impl CommutingTuple {
    pub fn new(mats: Vec<CMatrix>) -> Result<Self> {
        Self::with_tol(mats, Tolerances::default().commute)
    }

    /// Accepts the tuple when `||T_i T_j - T_j T_i||_F <= tol * ||T_i|| ||T_j||`.
    pub fn with_tol(mats: Vec<CMatrix>, tol: f64) -> Result<Self> {
        let first = mats.first().ok_or(Error::EmptyFamily)?;
        let d = linalg::ensure_square(first)?;
        for m in &mats {
            if linalg::ensure_square(m)? != d {
                return Err(Error::DimensionMismatch(format!(
                    "tuple mixes {d}x{d} and {}x{} matrices",
                    m.nrows(),
                    m.ncols()
                )));
            }
            linalg::ensure_finite(m)?;
        }
        let norms: Vec<f64> = mats.iter().map(linalg::frobenius).collect();
        let mut bound: f64 = 0.0;
        for i in 0..mats.len() {
            for j in (i + 1)..mats.len() {
                let c = linalg::commutator_norm(&mats[i], &mats[j]);
                let scale = norms[i] * norms[j];
                let rel = if scale > 0.0 { c / scale } else { 0.0 };
                if rel > tol {
                    return Err(Error::NonCommuting { i, j, norm: c });
                }
                bound = bound.max(c);
            }
        }
        Ok(CommutingTuple { mats, commutator_bound: bound })
    }

    pub fn single(t: CMatrix) -> Result<Self> {
        Self::new(vec![t])
    }

    pub fn dim(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn arity(&self) -> usize {
        self.mats.len()
    }

    pub fn mats(&self) -> &[CMatrix] {
        &self.mats
    }

    pub fn commutator_bound(&self) -> f64 {
        self.commutator_bound
    }

    /// `(T_{perm[0]}, ..., T_{perm[n-1]})`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.arity();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidMap(format!("{perm:?} is not a permutation of 0..{n}")));
        }
        Ok(CommutingTuple {
            mats: perm.iter().map(|&p| self.mats[p].clone()).collect(),
            commutator_bound: self.commutator_bound,
        })
    }
}

/// One joint generalized eigenspace.
#[derive(Debug, Clone)]
pub struct Cluster {
    /// Mean eigenvalue of each `T_i` on the space.
    pub point: Vec<C64>,
    pub multiplicity: usize,
    pub space: Subspace,
}

#[derive(Debug, Clone)]
pub struct JointDecomposition {
    tuple: CommutingTuple,
    clusters: Vec<Cluster>,
    basis_cond: f64,
    tol: Tolerances,
}

impl JointDecomposition {
    pub fn compute(tuple: &CommutingTuple) -> Result<Self> {
        Self::compute_with(tuple, &Tolerances::default())
    }

    pub fn compute_with(tuple: &CommutingTuple, tol: &Tolerances) -> Result<Self> {
        let d = tuple.dim();
        let norms: Vec<f64> = tuple.mats().iter().map(linalg::frobenius).collect();
        let mut leaves = Vec::new();
        refine(tuple, &norms, tol, linalg::identity(d), 0, &mut leaves)?;

        let mut clusters = Vec::with_capacity(leaves.len());
        for frame in leaves {
            let m = frame.ncols();
            let mut point = Vec::with_capacity(tuple.arity());
            for (t, &norm) in tuple.mats().iter().zip(&norms) {
                let tv = t * &frame;
                let compressed = frame.adjoint() * &tv;
                let residual = (tv - &frame * &compressed).norm();
                if residual > tol.invariance * norm {
                    return Err(Error::DecompositionFailed {
                        reason: format!("cluster space of dimension {m} is not invariant"),
                        residual: residual / norm.max(f64::MIN_POSITIVE),
                    });
                }
                point.push(compressed.trace() / m as f64);
            }
            clusters.push(Cluster { point, multiplicity: m, space: Subspace::from_orthonormal(frame)? });
        }
        clusters.sort_by(|a, b| cmp_points(&a.point, &b.point));

        let frames: Vec<&CMatrix> = clusters.iter().map(|c| c.space.frame()).collect();
        let basis_cond = linalg::condition_number(&linalg::hstack(&frames));
        Ok(JointDecomposition { tuple: tuple.clone(), clusters, basis_cond, tol: *tol })
    }

    /// Decomposition of a single operator.
    pub fn of_matrix(t: &CMatrix) -> Result<Self> {
        Self::compute(&CommutingTuple::single(t.clone())?)
    }

    pub fn dim(&self) -> usize {
        self.tuple.dim()
    }

    pub fn arity(&self) -> usize {
        self.tuple.arity()
    }

    pub fn tuple(&self) -> &CommutingTuple {
        &self.tuple
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    /// Condition number of the concatenated cluster frames.
    pub fn basis_cond(&self) -> f64 {
        self.basis_cond
    }

    /// A fresh decomposition of the single operator `T_i`.
    pub fn marginal(&self, i: usize) -> Result<JointDecomposition> {
        let t = self
            .tuple
            .mats()
            .get(i)
            .ok_or_else(|| Error::DimensionMismatch(format!("no operator {i} in a {}-tuple", self.arity())))?;
        Self::compute_with(&CommutingTuple::single(t.clone())?, &self.tol)
    }

    /// Which clusters lie in `region`; errors when a point is within the
    /// boundary tolerance of the region's boundary.
    pub fn classify(&self, region: &Region) -> Result<Vec<bool>> {
        let rd = region.dim()?;
        if rd != self.arity() {
            return Err(Error::DimensionMismatch(format!(
                "region in C^{rd} for a {}-tuple",
                self.arity()
            )));
        }
        self.clusters
            .iter()
            .map(|c| {
                let margin = region.boundary_margin(&c.point)?;
                if margin < self.tol.boundary {
                    return Err(Error::BoundaryAmbiguous { point: linalg::fmt_point(&c.point), distance: margin });
                }
                region.contains(&c.point)
            })
            .collect()
    }

    fn join_where(&self, mask: &[bool], want: bool) -> Result<Subspace> {
        Subspace::join_all(
            self.dim(),
            self.clusters.iter().zip(mask).filter(|(_, &m)| m == want).map(|(c, _)| &c.space),
        )
    }

    /// The Riesz idempotent: range is the sum of cluster spaces inside `region`,
    /// kernel the sum of those outside.
    pub fn riesz_idempotent(&self, region: &Region) -> Result<Idempotent> {
        let mask = self.classify(region)?;
        Idempotent::from_pair(self.join_where(&mask, true)?, self.join_where(&mask, false)?)
    }

    /// The spectral subspace `K(B)`; its orthogonal projection is `P(B)`.
    pub fn spectral_projection(&self, region: &Region) -> Result<Subspace> {
        let mask = self.classify(region)?;
        self.join_where(&mask, true)
    }

    /// `mu(B)` as an exact multiplicity fraction.
    pub fn spectral_trace(&self, region: &Region) -> Result<TraceValue> {
        let mask = self.classify(region)?;
        let rank = self.clusters.iter().zip(&mask).filter(|(_, &m)| m).map(|(c, _)| c.multiplicity).sum();
        Ok(TraceValue::new(rank, self.dim()))
    }

    pub fn to_json(&self) -> DecompositionJson {
        DecompositionJson {
            d: self.dim(),
            n: self.arity(),
            basis_cond: self.basis_cond,
            commutator_bound: self.tuple.commutator_bound(),
            clusters: self
                .clusters
                .iter()
                .map(|c| ClusterJson {
                    point: c.point.clone(),
                    multiplicity: c.multiplicity,
                    frame: MatrixJson::from_matrix(c.space.frame()),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterJson {
    pub point: Vec<C64>,
    pub multiplicity: usize,
    pub frame: MatrixJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub d: usize,
    pub n: usize,
    pub basis_cond: f64,
    pub commutator_bound: f64,
    pub clusters: Vec<ClusterJson>,
}

/// Compression `K^H T K` of `t` to an invariant subspace.
pub fn restrict(t: &CMatrix, k: &Subspace) -> Result<CMatrix> {
    restrict_with_tol(t, k, crate::tol::INVARIANCE)
}

pub fn restrict_with_tol(t: &CMatrix, k: &Subspace, tol: f64) -> Result<CMatrix> {
    let d = linalg::ensure_square(t)?;
    if k.ambient_dim() != d {
        return Err(Error::DimensionMismatch(format!("subspace of C^{} for a {d}x{d} operator", k.ambient_dim())));
    }
    let f = k.frame();
    let tf = t * f;
    let compressed = f.adjoint() * &tf;
    let residual = (tf - f * &compressed).norm();
    let scale = linalg::frobenius(t);
    if residual > tol * scale && residual > 0.0 {
        return Err(Error::NotInvariant { residual: residual / scale });
    }
    Ok(compressed)
}

fn cmp_points(a: &[C64], b: &[C64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o.is_ne() {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

/// Transitive closure of `|a - b| <= delta`; clusters listed in order of first member.
fn chain_clusters(eigs: &[C64], delta: f64) -> Vec<Vec<usize>> {
    let n = eigs.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn root(label: &mut [usize], mut i: usize) -> usize {
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (eigs[i] - eigs[j]).norm() <= delta {
                let (a, b) = (root(&mut label, i), root(&mut label, j));
                if a != b {
                    label[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let r = root(&mut label, i);
        match groups.iter_mut().find(|(g, _)| *g == r) {
            Some((_, members)) => members.push(i),
            None => groups.push((r, vec![i])),
        }
    }
    groups.into_iter().map(|(_, m)| m).collect()
}

/// Split the invariant frame `v` by the eigenvalue clusters of operator
/// `op` compressed to it, then refine each piece by the remaining operators.
fn refine(
    tuple: &CommutingTuple,
    norms: &[f64],
    tol: &Tolerances,
    v: CMatrix,
    op: usize,
    leaves: &mut Vec<CMatrix>,
) -> Result<()> {
    if op == tuple.arity() {
        leaves.push(v);
        return Ok(());
    }
    let t = &tuple.mats()[op];
    let delta = tol.cluster * norms[op];
    let mut rest = v;
    loop {
        if rest.ncols() == 0 {
            return Ok(());
        }
        let a = rest.adjoint() * t * &rest;
        let s = linalg::schur(&a)?;
        let eigs = s.eigenvalues();
        let groups = chain_clusters(&eigs, delta);
        if groups.len() == 1 {
            return refine(tuple, norms, tol, rest, op + 1, leaves);
        }
        let chosen: Vec<C64> = groups[0].iter().map(|&i| eigs[i]).collect();
        let (head, tail) = split_leading(&s, &chosen, delta)?;
        refine(tuple, norms, tol, &rest * head, op + 1, leaves)?;
        rest = &rest * tail;
    }
}

/// For a Schur pair, orthonormal bases (in Schur coordinates of `a`) of the
/// invariant subspace of the `chosen` eigenvalues and of its spectral
/// complement.
fn split_leading(s: &Schur, chosen: &[C64], delta: f64) -> Result<(CMatrix, CMatrix)> {
    let m = s.dim();
    let select = |z: C64| chosen.iter().any(|&c| c == z);
    let (r, k) = linalg::reorder_schur_with_floor(s, select, 0.5 * delta)?;
    let u11 = r.u.view((0, 0), (k, k)).into_owned();
    let u12 = r.u.view((0, k), (k, m - k)).into_owned();
    let u22 = r.u.view((k, k), (m - k, m - k)).into_owned();
    // U11 X - X U22 = -U12, so the columns of [X; I] span the complement.
    let x = linalg::solve_triangular_sylvester(&u11, &u22, &(-u12));
    let mut stacked = CMatrix::zeros(m, m - k);
    stacked.view_mut((0, 0), (k, m - k)).copy_from(&x);
    for j in 0..(m - k) {
        stacked[(k + j, j)] = C64::new(1.0, 0.0);
    }
    let tail_raw = &r.q * stacked;
    let tail = tail_raw.qr().q();
    let head = r.q.columns(0, k).into_owned();
    Ok((head, tail))
}
