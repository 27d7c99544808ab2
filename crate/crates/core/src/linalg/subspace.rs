//! Closed subspaces of `C^d` stored as orthonormal frames, with the
//! orthogonal-projection lattice operations.

use super::{CMatrix, C64};
use crate::error::{Error, Result};
use crate::tol;

#[derive(Debug, Clone)]
pub struct Subspace {
    frame: CMatrix,
}

impl Subspace {
    /// Wrap a frame whose columns are already orthonormal.
    pub fn from_orthonormal(frame: CMatrix) -> Result<Self> {
        if frame.ncols() > frame.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "frame has {} columns in dimension {}",
                frame.ncols(),
                frame.nrows()
            )));
        }
        let k = frame.ncols();
        let residual = (frame.adjoint() * &frame - CMatrix::identity(k, k)).norm();
        if residual > tol::ORTHONORMAL * (k.max(1) as f64) {
            return Err(Error::NotOrthonormal { residual });
        }
        Ok(Subspace { frame })
    }

    /// Column space of `vectors`, rank decided relative to the largest singular value.
    pub fn span(vectors: &CMatrix) -> Self {
        Self::span_with_tol(vectors, tol::RANK, 0.0)
    }

    /// Column space where singular values above `max(rel * s_max, abs)` count.
    pub fn span_with_tol(vectors: &CMatrix, rel: f64, abs: f64) -> Self {
        let d = vectors.nrows();
        if vectors.ncols() == 0 || d == 0 {
            return Subspace::zero(d);
        }
        let f = super::svd(vectors);
        let smax = f.s.first().copied().unwrap_or(0.0);
        if smax == 0.0 {
            return Subspace::zero(d);
        }
        let cut = (rel * smax).max(abs);
        let rank = f.s.iter().take_while(|&&x| x > cut).count();
        Subspace { frame: f.u.columns(0, rank).into_owned() }
    }

    pub fn zero(d: usize) -> Self {
        Subspace { frame: CMatrix::zeros(d, 0) }
    }

    pub fn full(d: usize) -> Self {
        Subspace { frame: CMatrix::identity(d, d) }
    }

    /// Span of the standard basis vectors with the given indices.
    pub fn coordinate(d: usize, indices: &[usize]) -> Self {
        let mut frame = CMatrix::zeros(d, indices.len());
        for (c, &i) in indices.iter().enumerate() {
            frame[(i, c)] = C64::new(1.0, 0.0);
        }
        Subspace { frame }
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn frame(&self) -> &CMatrix {
        &self.frame
    }

    pub fn into_frame(self) -> CMatrix {
        self.frame
    }

    /// Orthogonal projection onto the subspace.
    pub fn projector(&self) -> CMatrix {
        &self.frame * self.frame.adjoint()
    }

    fn check_same_ambient(&self, other: &Subspace) -> Result<()> {
        if self.ambient_dim() != other.ambient_dim() {
            return Err(Error::DimensionMismatch(format!(
                "subspaces of C^{} and C^{}",
                self.ambient_dim(),
                other.ambient_dim()
            )));
        }
        Ok(())
    }

    /// Cosines of the principal angles between the two subspaces, descending.
    pub fn principal_cosines(&self, other: &Subspace) -> Result<Vec<f64>> {
        self.check_same_ambient(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Vec::new());
        }
        let m = self.frame.adjoint() * &other.frame;
        Ok(super::svd(&m).s.into_iter().map(|x| x.min(1.0)).collect())
    }

    /// `|| (1 - P_self) F_other ||_2`: zero iff `other` is contained in `self`.
    pub fn containment_residual(&self, other: &Subspace) -> Result<f64> {
        self.check_same_ambient(other)?;
        if other.is_zero() {
            return Ok(0.0);
        }
        let residual = &other.frame - &self.frame * (self.frame.adjoint() * &other.frame);
        Ok(super::spectral_norm(&residual))
    }

    pub fn contains(&self, other: &Subspace, tol: f64) -> Result<bool> {
        Ok(self.containment_residual(other)? <= tol)
    }

    /// Projector distance `||P - Q||_2`; equals 1 when the dimensions differ.
    pub fn distance(&self, other: &Subspace) -> Result<f64> {
        self.check_same_ambient(other)?;
        if self.dim() != other.dim() {
            return Ok(1.0);
        }
        self.containment_residual(other)
    }

    /// Lattice meet `U ∧ V` via principal angles.
    pub fn meet(&self, other: &Subspace) -> Result<Subspace> {
        self.meet_with_tol(other, tol::ANGLE)
    }

    pub fn meet_with_tol(&self, other: &Subspace, angle_tol: f64) -> Result<Subspace> {
        self.check_same_ambient(other)?;
        let d = self.ambient_dim();
        if self.is_zero() || other.is_zero() {
            return Ok(Subspace::zero(d));
        }
        let m = self.frame.adjoint() * &other.frame;
        let f = super::svd(&m);
        let k = f.s.iter().take_while(|&&x| x >= 1.0 - angle_tol).count();
        let basis = &self.frame * f.u.columns(0, k);
        Ok(Subspace::span(&basis))
    }

    /// Lattice join `U ∨ V` (closed span of the sum).
    pub fn join(&self, other: &Subspace) -> Result<Subspace> {
        self.join_with_tol(other, tol::RANK)
    }

    pub fn join_with_tol(&self, other: &Subspace, rank_tol: f64) -> Result<Subspace> {
        self.check_same_ambient(other)?;
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        let stacked = hstack(&[&self.frame, &other.frame]);
        Ok(Subspace::span_with_tol(&stacked, rank_tol, 0.0))
    }

    /// Join of an arbitrary family; zero subspace for an empty family.
    pub fn join_all<'a>(d: usize, spaces: impl IntoIterator<Item = &'a Subspace>) -> Result<Subspace> {
        let frames: Vec<&CMatrix> = spaces.into_iter().map(|s| &s.frame).collect();
        for f in &frames {
            if f.nrows() != d {
                return Err(Error::DimensionMismatch(format!("subspace of C^{} in C^{d}", f.nrows())));
            }
        }
        if frames.is_empty() {
            return Ok(Subspace::zero(d));
        }
        Ok(Subspace::span(&hstack(&frames)))
    }

    pub fn meet_all<'a>(d: usize, spaces: impl IntoIterator<Item = &'a Subspace>) -> Result<Subspace> {
        let mut acc = Subspace::full(d);
        for s in spaces {
            acc = acc.meet(s)?;
        }
        Ok(acc)
    }

    /// Orthogonal complement.
    pub fn complement(&self) -> Subspace {
        let d = self.ambient_dim();
        if self.is_zero() {
            return Subspace::full(d);
        }
        if self.dim() == d {
            return Subspace::zero(d);
        }
        let residual = CMatrix::identity(d, d) - self.projector();
        let f = super::svd(&residual);
        Subspace::span(&f.u.columns(0, d - self.dim()).into_owned())
    }

    /// Null space of `m` (as a subspace of its domain), rank decided relative to `||m||_2`.
    pub fn null_space(m: &CMatrix) -> Subspace {
        Self::null_space_with_tol(m, tol::RANK, 0.0)
    }

    pub fn null_space_with_tol(m: &CMatrix, rel: f64, abs: f64) -> Subspace {
        Subspace::span_with_tol(&m.adjoint(), rel, abs).complement()
    }

    /// Image of the subspace under a linear map with `ambient_dim` columns.
    pub fn image(&self, map: &CMatrix) -> Result<Subspace> {
        if map.ncols() != self.ambient_dim() {
            return Err(Error::DimensionMismatch("map does not act on this space".into()));
        }
        Ok(Subspace::span(&(map * &self.frame)))
    }
}

pub fn select_columns(m: &CMatrix, cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(m.nrows(), cols.len(), |i, j| m[(i, cols[j])])
}

pub fn hstack(blocks: &[&CMatrix]) -> CMatrix {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut c0 = 0;
    for b in blocks {
        out.view_mut((0, c0), (rows, b.ncols())).copy_from(*b);
        c0 += b.ncols();
    }
    out
}
