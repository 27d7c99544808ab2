//! Borel-set descriptors with exact membership, and dyadic box covers of
//! preimages under addition and multiplication.

mod cover;
mod verify;

pub use cover::{
    coverage, dyadic_cover, dyadic_cover_focused, verify_cover, BoxCover, CoverBox, CoverMap, MAX_COVER_DEPTH,
};
pub use verify::{verify_general_borel, verify_preimage_projection};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::measures::MapDescriptor;

/// Expression tree over primitive sets in `C^n`.
///
/// Boxes are half-open: coordinate `w` lies in `I(z, delta)` when
/// `Re z - delta < Re w <= Re z + delta` and likewise for the imaginary part.
/// A box in `C^n` is the product of such squares with a common `delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Region {
    Empty { dim: usize },
    Full { dim: usize },
    Box { center: Vec<C64>, delta: f64 },
    OpenBall { center: Vec<C64>, radius: f64 },
    ClosedBall { center: Vec<C64>, radius: f64 },
    Union { members: Vec<Region> },
    Intersection { members: Vec<Region> },
    Complement { inner: Box<Region> },
    /// Cartesian product; factor dimensions add up.
    Product { factors: Vec<Region> },
    /// `{ p : map(p) in target }`.
    Preimage { map: MapDescriptor, target: Box<Region> },
    /// `{ p : conj(p) in inner }`.
    Conjugate { inner: Box<Region> },
}

impl Region {
    pub fn empty(dim: usize) -> Self {
        Region::Empty { dim }
    }

    pub fn full(dim: usize) -> Self {
        Region::Full { dim }
    }

    /// The half-open square `I(z, delta)` in `C`.
    pub fn square(z: C64, delta: f64) -> Self {
        Region::Box { center: vec![z], delta }
    }

    pub fn open_disk(z: C64, radius: f64) -> Self {
        Region::OpenBall { center: vec![z], radius }
    }

    pub fn closed_disk(z: C64, radius: f64) -> Self {
        Region::ClosedBall { center: vec![z], radius }
    }

    pub fn open_ball(center: Vec<C64>, radius: f64) -> Self {
        Region::OpenBall { center, radius }
    }

    pub fn closed_ball(center: Vec<C64>, radius: f64) -> Self {
        Region::ClosedBall { center, radius }
    }

    pub fn union(members: Vec<Region>) -> Self {
        Region::Union { members }
    }

    pub fn intersection(members: Vec<Region>) -> Self {
        Region::Intersection { members }
    }

    pub fn complement(inner: Region) -> Self {
        Region::Complement { inner: Box::new(inner) }
    }

    pub fn product(factors: Vec<Region>) -> Self {
        Region::Product { factors }
    }

    pub fn preimage(map: MapDescriptor, target: Region) -> Self {
        Region::Preimage { map, target: Box::new(target) }
    }

    pub fn conjugate(inner: Region) -> Self {
        Region::Conjugate { inner: Box::new(inner) }
    }

    pub fn dim(&self) -> Result<usize> {
        match self {
            Region::Empty { dim } | Region::Full { dim } => Ok(*dim),
            Region::Box { center, .. } | Region::OpenBall { center, .. } | Region::ClosedBall { center, .. } => {
                Ok(center.len())
            }
            Region::Union { members } | Region::Intersection { members } => {
                let first = members
                    .first()
                    .ok_or_else(|| Error::InvalidRegion("empty member list".into()))?
                    .dim()?;
                for m in &members[1..] {
                    if m.dim()? != first {
                        return Err(Error::InvalidRegion("members of different dimensions".into()));
                    }
                }
                Ok(first)
            }
            Region::Complement { inner } | Region::Conjugate { inner } => inner.dim(),
            Region::Product { factors } => {
                if factors.is_empty() {
                    return Err(Error::InvalidRegion("empty product".into()));
                }
                factors.iter().map(Region::dim).sum()
            }
            Region::Preimage { map, target } => {
                map.validate()?;
                map.input_dim(target.dim()?)
            }
        }
    }

    /// Exact membership.
    pub fn contains(&self, p: &[C64]) -> Result<bool> {
        let dim = self.dim()?;
        if p.len() != dim {
            return Err(Error::DimensionMismatch(format!("point in C^{} for a region in C^{dim}", p.len())));
        }
        self.contains_unchecked(p)
    }

    fn contains_unchecked(&self, p: &[C64]) -> Result<bool> {
        Ok(match self {
            Region::Empty { .. } => false,
            Region::Full { .. } => true,
            Region::Box { center, delta } => center.iter().zip(p).all(|(c, w)| {
                c.re - delta < w.re && w.re <= c.re + delta && c.im - delta < w.im && w.im <= c.im + delta
            }),
            Region::OpenBall { center, radius } => norm_diff(p, center) < *radius,
            Region::ClosedBall { center, radius } => norm_diff(p, center) <= *radius,
            Region::Union { members } => {
                for m in members {
                    if m.contains_unchecked(p)? {
                        return Ok(true);
                    }
                }
                false
            }
            Region::Intersection { members } => {
                for m in members {
                    if !m.contains_unchecked(p)? {
                        return Ok(false);
                    }
                }
                true
            }
            Region::Complement { inner } => !inner.contains_unchecked(p)?,
            Region::Product { factors } => {
                let mut off = 0;
                for f in factors {
                    let k = f.dim()?;
                    if !f.contains_unchecked(&p[off..off + k])? {
                        return Ok(false);
                    }
                    off += k;
                }
                true
            }
            Region::Preimage { map, target } => target.contains_unchecked(&map.apply(p)?)?,
            Region::Conjugate { inner } => {
                let q: Vec<C64> = p.iter().map(|z| z.conj()).collect();
                inner.contains_unchecked(&q)?
            }
        })
    }

    /// Lower bound on the Euclidean distance from `p` to the boundary.
    ///
    /// Exact for primitives and a valid lower bound through unions,
    /// intersections, complements and products. For preimages the margin is
    /// measured in the target space at the image point.
    pub fn boundary_margin(&self, p: &[C64]) -> Result<f64> {
        let dim = self.dim()?;
        if p.len() != dim {
            return Err(Error::DimensionMismatch(format!("point in C^{} for a region in C^{dim}", p.len())));
        }
        self.margin_unchecked(p)
    }

    fn margin_unchecked(&self, p: &[C64]) -> Result<f64> {
        Ok(match self {
            Region::Empty { .. } | Region::Full { .. } => f64::INFINITY,
            Region::Box { center, delta } => box_margin(center, *delta, p),
            Region::OpenBall { center, radius } | Region::ClosedBall { center, radius } => {
                (norm_diff(p, center) - radius).abs()
            }
            Region::Union { members } => {
                let mut inside = Vec::new();
                let mut all = Vec::new();
                for m in members {
                    let g = m.margin_unchecked(p)?;
                    if m.contains_unchecked(p)? {
                        inside.push(g);
                    }
                    all.push(g);
                }
                if inside.is_empty() {
                    all.into_iter().fold(f64::INFINITY, f64::min)
                } else {
                    inside.into_iter().fold(0.0, f64::max)
                }
            }
            Region::Intersection { members } => {
                let mut outside = Vec::new();
                let mut all = Vec::new();
                for m in members {
                    let g = m.margin_unchecked(p)?;
                    if !m.contains_unchecked(p)? {
                        outside.push(g);
                    }
                    all.push(g);
                }
                if outside.is_empty() {
                    all.into_iter().fold(f64::INFINITY, f64::min)
                } else {
                    outside.into_iter().fold(0.0, f64::max)
                }
            }
            Region::Complement { inner } => inner.margin_unchecked(p)?,
            Region::Product { factors } => {
                let mut outside = Vec::new();
                let mut all = Vec::new();
                let mut off = 0;
                for f in factors {
                    let k = f.dim()?;
                    let q = &p[off..off + k];
                    let g = f.margin_unchecked(q)?;
                    if !f.contains_unchecked(q)? {
                        outside.push(g);
                    }
                    all.push(g);
                    off += k;
                }
                if outside.is_empty() {
                    all.into_iter().fold(f64::INFINITY, f64::min)
                } else {
                    outside.into_iter().fold(0.0, f64::max)
                }
            }
            Region::Preimage { map, target } => target.margin_unchecked(&map.apply(p)?)?,
            Region::Conjugate { inner } => {
                let q: Vec<C64> = p.iter().map(|z| z.conj()).collect();
                inner.margin_unchecked(&q)?
            }
        })
    }

    /// Conservative test that the closed disk `|w - c| <= r` lies inside
    /// this region of `C`. `true` is a guarantee; `false` may be a miss.
    pub fn contains_closed_disk(&self, c: C64, r: f64) -> bool {
        match self {
            Region::Empty { .. } => false,
            Region::Full { .. } => true,
            Region::Box { center, delta } if center.len() == 1 => {
                let z = center[0];
                c.re - r > z.re - delta && c.re + r <= z.re + delta && c.im - r > z.im - delta && c.im + r <= z.im + delta
            }
            Region::OpenBall { center, radius } if center.len() == 1 => (c - center[0]).norm() + r < *radius,
            Region::ClosedBall { center, radius } if center.len() == 1 => (c - center[0]).norm() + r <= *radius,
            Region::Union { members } => members.iter().any(|m| m.contains_closed_disk(c, r)),
            Region::Intersection { members } => members.iter().all(|m| m.contains_closed_disk(c, r)),
            Region::Complement { inner } => inner.misses_closed_disk(c, r),
            Region::Conjugate { inner } => inner.contains_closed_disk(c.conj(), r),
            _ => false,
        }
    }

    /// Conservative test that the closed disk `|w - c| <= r` does not meet
    /// this region of `C`.
    pub fn misses_closed_disk(&self, c: C64, r: f64) -> bool {
        match self {
            Region::Empty { .. } => true,
            Region::Full { .. } => false,
            Region::Box { center, delta } if center.len() == 1 => {
                let z = center[0];
                let dx = ((z.re - delta) - c.re).max(c.re - (z.re + delta)).max(0.0);
                let dy = ((z.im - delta) - c.im).max(c.im - (z.im + delta)).max(0.0);
                dx.hypot(dy) > r
            }
            Region::OpenBall { center, radius } if center.len() == 1 => (c - center[0]).norm() >= radius + r,
            Region::ClosedBall { center, radius } if center.len() == 1 => (c - center[0]).norm() > radius + r,
            Region::Union { members } => members.iter().all(|m| m.misses_closed_disk(c, r)),
            Region::Intersection { members } => members.iter().any(|m| m.misses_closed_disk(c, r)),
            Region::Complement { inner } => inner.contains_closed_disk(c, r),
            Region::Conjugate { inner } => inner.misses_closed_disk(c.conj(), r),
            _ => false,
        }
    }
}

fn norm_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn box_margin(center: &[C64], delta: f64, p: &[C64]) -> f64 {
    let mut coords = Vec::with_capacity(2 * p.len());
    for (c, w) in center.iter().zip(p) {
        coords.push((w.re, c.re - delta, c.re + delta));
        coords.push((w.im, c.im - delta, c.im + delta));
    }
    let inside = coords.iter().all(|&(x, lo, hi)| lo <= x && x <= hi);
    if inside {
        coords.iter().map(|&(x, lo, hi)| (x - lo).min(hi - x)).fold(f64::INFINITY, f64::min)
    } else {
        coords
            .iter()
            .map(|&(x, lo, hi)| (lo - x).max(x - hi).max(0.0).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    #[test]
    fn half_open_square_membership() {
        let b = Region::square(c64(0.0, 0.0), 1.0);
        assert!(b.contains(&[c64(1.0, 1.0)]).unwrap());
        assert!(!b.contains(&[c64(-1.0, 0.0)]).unwrap());
        assert!(!b.contains(&[c64(0.0, -1.0)]).unwrap());
        assert!(b.contains(&[c64(-0.999, 0.5)]).unwrap());
    }

    #[test]
    fn complement_of_full_contains_nothing() {
        let r = Region::complement(Region::full(2));
        assert!(!r.contains(&[c64(3.0, 1.0), c64(-2.0, 0.0)]).unwrap());
    }

    #[test]
    fn adjacent_squares_partition_their_union() {
        let a = Region::square(c64(0.0, 0.0), 1.0);
        let b = Region::square(c64(2.0, 0.0), 1.0);
        for x in [-0.5, 0.0, 1.0, 1.0 + 1e-15, 2.5, 3.0] {
            let p = [c64(x, 0.0)];
            let ina = a.contains(&p).unwrap();
            let inb = b.contains(&p).unwrap();
            assert!(!(ina && inb));
            assert_eq!(ina || inb, x > -1.0 && x <= 3.0);
        }
    }

    #[test]
    fn product_and_preimage() {
        let r = Region::product(vec![Region::open_disk(c64(0.0, 0.0), 1.0), Region::full(1)]);
        assert_eq!(r.dim().unwrap(), 2);
        assert!(r.contains(&[c64(0.5, 0.0), c64(100.0, 0.0)]).unwrap());
        let sum_in = Region::preimage(MapDescriptor::AddLast, Region::open_disk(c64(3.0, 0.0), 0.5));
        assert_eq!(sum_in.dim().unwrap(), 2);
        assert!(sum_in.contains(&[c64(1.0, 0.0), c64(2.0, 0.0)]).unwrap());
        assert!(!sum_in.contains(&[c64(1.0, 0.0), c64(1.0, 0.0)]).unwrap());
    }

    #[test]
    fn dimension_mismatch() {
        let r = Region::open_disk(c64(0.0, 0.0), 1.0);
        assert!(r.contains(&[c64(0.0, 0.0), c64(0.0, 0.0)]).is_err());
        let bad = Region::union(vec![Region::full(1), Region::full(2)]);
        assert!(bad.dim().is_err());
    }

    #[test]
    fn margins() {
        let b = Region::square(c64(0.0, 0.0), 1.0);
        assert!((b.boundary_margin(&[c64(0.5, 0.0)]).unwrap() - 0.5).abs() < 1e-15);
        assert!((b.boundary_margin(&[c64(4.0, 5.0)]).unwrap() - 5.0).abs() < 1e-12);
        let d = Region::open_disk(c64(0.0, 0.0), 1.0);
        assert!((d.boundary_margin(&[c64(0.25, 0.0)]).unwrap() - 0.75).abs() < 1e-15);
        let u = Region::union(vec![d.clone(), Region::open_disk(c64(5.0, 0.0), 1.0)]);
        assert!((u.boundary_margin(&[c64(3.0, 0.0)]).unwrap() - 1.0).abs() < 1e-15);
        assert!((Region::complement(d).boundary_margin(&[c64(0.0, 0.0)]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn disk_tests() {
        let u = Region::open_disk(c64(0.0, 0.0), 4.0);
        assert!(u.contains_closed_disk(c64(0.0, 0.0), 2.0 * 2f64.sqrt()));
        assert!(!u.contains_closed_disk(c64(0.0, 0.0), 4.0));
        assert!(u.misses_closed_disk(c64(10.0, 0.0), 6.0));
        assert!(!u.misses_closed_disk(c64(10.0, 0.0), 6.5));
        let sq = Region::square(c64(0.0, 0.0), 1.0);
        assert!(!sq.contains_closed_disk(c64(0.0, 0.0), 1.0));
        assert!(sq.contains_closed_disk(c64(0.0, 0.0), 0.999));
        let hole = Region::complement(Region::closed_disk(c64(0.0, 0.0), 1.0));
        assert!(hole.contains_closed_disk(c64(3.0, 0.0), 1.5));
        assert!(!hole.contains_closed_disk(c64(3.0, 0.0), 2.0));
    }

    #[test]
    fn json_tree() {
        let r = Region::union(vec![Region::square(c64(0.0, 0.0), 1.0), Region::complement(Region::full(1))]);
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"type\":\"union\""));
        let back: Region = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
