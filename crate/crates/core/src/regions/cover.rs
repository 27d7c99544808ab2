//! Dyadic box covers of `a^{-1}(U)` and `m^{-1}(U)` for an open `U ⊆ C`,
//! where `a(z, w) = z + w` and `m(z, w) = z w`.
//!
//! Level `l` uses half-open squares of half-width `delta = 2^-l`. Per real
//! coordinate the level-`l` intervals are `(o - 1 + 2k delta, o - 1 + 2(k+1) delta]`
//! for the lattice origin `o = GRID_ORIGIN`, so level 0 is centred near the even
//! integers and every interval splits into the two intervals `2k, 2k + 1` one
//! level down. A box pair is a product of two squares, i.e. 4 intervals, and
//! has 16 children.
//!
//! The origin is a small non-dyadic offset: with the lattice anchored exactly
//! at the odd integers, `0` and the real axis would be interval boundaries at
//! every level below 0, so real or singular operators could never be covered.

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::Region;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::measures::AtomicMeasure;
use crate::report::Report;

pub const MAX_COVER_DEPTH: u32 = 12;

/// Default cap on visited box pairs for a full enumeration.
const MAX_VISITS: usize = 10_000_000;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Offset of the interval lattice in every real coordinate.
pub const GRID_ORIGIN: f64 = 9.173_531e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoverMap {
    Add,
    /// Multiplication; the safety radius uses an operator-norm bound for the
    /// second factor.
    Multiply { norm_bound: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverBox {
    pub z: C64,
    pub w: C64,
    pub delta: f64,
    pub level: u32,
    /// Interval indices `(Re z, Im z, Re w, Im w)` at `level`.
    pub index: [i64; 4],
}

#[derive(Debug, Clone, Serialize)]
pub struct BoxCover {
    pub boxes: Vec<CoverBox>,
    pub depth: u32,
    pub target: Region,
    pub map: CoverMap,
    /// Set when the visit budget stopped a full enumeration early.
    pub truncated: bool,
}

impl BoxCover {
    /// CSV rows `z_re,z_im,w_re,w_im,delta,level` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("z_re,z_im,w_re,w_im,delta,level\n");
        for b in &self.boxes {
            let _ = writeln!(out, "{},{},{},{},{},{}", b.z.re, b.z.im, b.w.re, b.w.im, b.delta, b.level);
        }
        out
    }

    /// Membership of `(z, w)` in the union of the boxes.
    pub fn covers(&self, z: C64, w: C64) -> bool {
        self.boxes.iter().any(|b| in_square(b.z, b.delta, z) && in_square(b.w, b.delta, w))
    }
}

fn in_square(c: C64, delta: f64, p: C64) -> bool {
    c.re - delta < p.re && p.re <= c.re + delta && c.im - delta < p.im && p.im <= c.im + delta
}

fn delta_at(level: u32) -> f64 {
    (-(level as f64)).exp2()
}

fn interval_center(k: i64, delta: f64) -> f64 {
    GRID_ORIGIN - 1.0 + (2 * k + 1) as f64 * delta
}

/// Index of the level interval `(lo, lo + 2 delta]` containing `x`.
fn interval_index(x: f64, delta: f64) -> i64 {
    let k = ((x - GRID_ORIGIN + 1.0) / (2.0 * delta)).ceil() as i64 - 1;
    // Guard the half-open boundary against rounding in the shift.
    let lo = GRID_ORIGIN - 1.0 + 2.0 * k as f64 * delta;
    if x <= lo {
        k - 1
    } else if x > lo + 2.0 * delta {
        k + 1
    } else {
        k
    }
}

fn make_box(level: u32, index: [i64; 4]) -> CoverBox {
    let delta = delta_at(level);
    let z = C64::new(interval_center(index[0], delta), interval_center(index[1], delta));
    let w = C64::new(interval_center(index[2], delta), interval_center(index[3], delta));
    CoverBox { z, w, delta, level, index }
}

/// Image centre and the radii (safety, enclosure) for a box pair.
///
/// The enclosure disk contains the image of the whole box pair under the map.
/// For addition the two coincide at `2 sqrt(2) delta`. For multiplication the
/// safety radius is `sqrt(2) delta (||T|| + |z|)` and the enclosure bounds
/// `|w|` by `|w_n| + sqrt(2) delta` instead of `||T||`.
fn image_disk(map: CoverMap, b: &CoverBox) -> (C64, f64, f64) {
    match map {
        CoverMap::Add => {
            let r = 2.0 * SQRT2 * b.delta;
            (b.z + b.w, r, r)
        }
        CoverMap::Multiply { norm_bound } => {
            let safety = SQRT2 * b.delta * (norm_bound + b.z.norm());
            let enclosure = SQRT2 * b.delta * (b.w.norm() + SQRT2 * b.delta + b.z.norm());
            (b.z * b.w, safety, enclosure)
        }
    }
}

fn accepts(target: &Region, map: CoverMap, b: &CoverBox) -> bool {
    let (c, safety, enclosure) = image_disk(map, b);
    target.contains_closed_disk(c, safety.max(enclosure))
}

fn hopeless(target: &Region, map: CoverMap, b: &CoverBox) -> bool {
    let (c, _, enclosure) = image_disk(map, b);
    target.misses_closed_disk(c, enclosure)
}

fn check_inputs(target: &Region, depth: u32) -> Result<()> {
    if target.dim()? != 1 {
        return Err(Error::InvalidRegion("cover target must be a region of C".into()));
    }
    if depth > MAX_COVER_DEPTH {
        return Err(Error::InvalidRegion(format!("depth {depth} exceeds the cap {MAX_COVER_DEPTH}")));
    }
    Ok(())
}

fn sort_boxes(boxes: &mut [CoverBox]) {
    boxes.sort_by(|a, b| {
        a.level
            .cmp(&b.level)
            .then(a.z.re.total_cmp(&b.z.re))
            .then(a.z.im.total_cmp(&b.z.im))
            .then(a.w.re.total_cmp(&b.w.re))
            .then(a.w.im.total_cmp(&b.w.im))
    });
}

/// Full enumeration over box pairs whose level-0 ancestors meet the square
/// `[-domain, domain]^2` in each coordinate.
///
/// Box pairs are visited level by level; a box pair is emitted as soon as its
/// image disk lies inside `U`, never subdivided afterwards, and discarded once
/// its image disk misses `U`.
pub fn dyadic_cover(target: &Region, map: CoverMap, depth: u32, domain: f64) -> Result<BoxCover> {
    check_inputs(target, depth)?;
    let kmax = ((domain + 1.0) / 2.0).ceil() as i64;
    let kmin = -kmax - 1;
    let mut frontier = Vec::new();
    for a in kmin..=kmax {
        for b in kmin..=kmax {
            for c in kmin..=kmax {
                for e in kmin..=kmax {
                    frontier.push([a, b, c, e]);
                }
            }
        }
    }
    let mut boxes = Vec::new();
    let mut visits = 0usize;
    let mut truncated = false;
    for level in 0..=depth {
        let mut next = Vec::new();
        for index in frontier {
            visits += 1;
            if visits > MAX_VISITS {
                truncated = true;
                break;
            }
            let b = make_box(level, index);
            if accepts(target, map, &b) {
                boxes.push(b);
            } else if level < depth && !hopeless(target, map, &b) {
                for child in children(index) {
                    next.push(child);
                }
            }
        }
        if truncated {
            break;
        }
        frontier = next;
    }
    sort_boxes(&mut boxes);
    Ok(BoxCover { boxes, depth, target: target.clone(), map, truncated })
}

fn children(index: [i64; 4]) -> impl Iterator<Item = [i64; 4]> {
    (0..16u8).map(move |mask| {
        let mut c = [0; 4];
        for (k, ck) in c.iter_mut().enumerate() {
            *ck = 2 * index[k] + ((mask >> k) & 1) as i64;
        }
        c
    })
}

/// The boxes of the full cover that contain at least one of `points`.
///
/// Produces exactly the boxes [`dyadic_cover`] would emit around those
/// points, without enumerating the rest of `C^2`.
pub fn dyadic_cover_focused(target: &Region, map: CoverMap, depth: u32, points: &[(C64, C64)]) -> Result<BoxCover> {
    check_inputs(target, depth)?;
    let mut seen: HashSet<(u32, [i64; 4])> = HashSet::new();
    let mut boxes = Vec::new();
    for &(z, w) in points {
        for level in 0..=depth {
            let delta = delta_at(level);
            let index = [
                interval_index(z.re, delta),
                interval_index(z.im, delta),
                interval_index(w.re, delta),
                interval_index(w.im, delta),
            ];
            if seen.contains(&(level, index)) {
                break;
            }
            let b = make_box(level, index);
            if accepts(target, map, &b) {
                seen.insert((level, index));
                boxes.push(b);
                break;
            }
            if hopeless(target, map, &b) {
                break;
            }
        }
    }
    sort_boxes(&mut boxes);
    Ok(BoxCover { boxes, depth, target: target.clone(), map, truncated: false })
}

/// `(covered mass, preimage mass)` of a measure on `C^2`.
pub fn coverage(cover: &BoxCover, mu: &AtomicMeasure) -> Result<(f64, f64)> {
    if mu.dim() != 2 {
        return Err(Error::DimensionMismatch("coverage needs a measure on C^2".into()));
    }
    let mut covered = 0.0;
    let mut preimage = 0.0;
    for a in mu.atoms() {
        let (z, w) = (a.point[0], a.point[1]);
        let image = match cover.map {
            CoverMap::Add => z + w,
            CoverMap::Multiply { .. } => z * w,
        };
        if cover.target.contains(&[image])? {
            preimage += a.weight;
        }
        if cover.covers(z, w) {
            covered += a.weight;
        }
    }
    Ok((covered, preimage))
}

/// Exact structural checks on a cover.
///
/// * pairwise disjointness: no box is a duplicate or a dyadic descendant of
///   another (integer index arithmetic);
/// * safety inclusion of the closed image disk in `U`;
/// * all 16 closed-box corners map into `U`.
pub fn verify_cover(cover: &BoxCover) -> Report {
    let mut report = Report::new("box-cover");
    let mut seen: HashSet<(u32, [i64; 4])> = HashSet::new();
    let mut overlaps = 0usize;
    for b in &cover.boxes {
        if !seen.insert((b.level, b.index)) {
            overlaps += 1;
        }
    }
    for b in &cover.boxes {
        let mut idx = b.index;
        for level in (0..b.level).rev() {
            for v in idx.iter_mut() {
                *v = v.div_euclid(2);
            }
            if seen.contains(&(level, idx)) {
                overlaps += 1;
            }
        }
    }
    report.check_eq("boxes pairwise disjoint (overlapping pairs)", overlaps, 0);

    let mut unsafe_boxes = 0usize;
    let mut escaped = 0usize;
    for b in &cover.boxes {
        let (c, safety, _) = image_disk(cover.map, b);
        if !cover.target.contains_closed_disk(c, safety) {
            unsafe_boxes += 1;
        }
        for mask in 0..16u8 {
            let pick = |bit: u8, x: f64| if (mask >> bit) & 1 == 1 { x + b.delta } else { x - b.delta };
            let z = C64::new(pick(0, b.z.re), pick(1, b.z.im));
            let w = C64::new(pick(2, b.w.re), pick(3, b.w.im));
            let image = match cover.map {
                CoverMap::Add => z + w,
                CoverMap::Multiply { .. } => z * w,
            };
            if !cover.target.contains(&[image]).unwrap_or(false) {
                escaped += 1;
            }
        }
    }
    report.check_eq("safety inclusion of image disk (violations)", unsafe_boxes, 0);
    report.check_eq("box corners map into U (violations)", escaped, 0);
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    #[test]
    fn level_zero_origin_pair_for_large_disk() {
        let u = Region::open_disk(c64(0.0, 0.0), 4.0);
        let cover = dyadic_cover(&u, CoverMap::Add, 1, 2.0).unwrap();
        let origin = cover.boxes.iter().find(|b| b.level == 0 && b.index == [0; 4]);
        assert!(origin.is_some(), "2 sqrt 2 < 4, the origin pair must be emitted");
        assert!(verify_cover(&cover).passed());
    }

    #[test]
    fn empty_target_gives_empty_cover() {
        let cover = dyadic_cover(&Region::empty(1), CoverMap::Add, 3, 2.0).unwrap();
        assert!(cover.boxes.is_empty());
    }

    #[test]
    fn small_disk_only_emits_deep_boxes() {
        let u = Region::open_disk(c64(0.0, 0.0), 0.1);
        let shallow = dyadic_cover(&u, CoverMap::Add, 1, 2.0).unwrap();
        assert!(shallow.boxes.iter().all(|b| b.level > 1));
        assert!(shallow.boxes.is_empty());
        let deep = dyadic_cover(&u, CoverMap::Add, 6, 1.0).unwrap();
        assert!(!deep.boxes.is_empty());
        assert!(deep.boxes.iter().all(|b| 2.0 * SQRT2 * b.delta < 0.1));
        assert!(verify_cover(&deep).passed());
    }

    #[test]
    fn interval_index_respects_half_open_boundaries() {
        // Boundaries `o - 1 + 2k delta`, formed as in `interval_index`.
        let edge = |k: f64, delta: f64| GRID_ORIGIN - 1.0 + 2.0 * k * delta;
        assert_eq!(interval_index(edge(1.0, 1.0), 1.0), 0);
        assert_eq!(interval_index(edge(1.0, 1.0) + 1e-12, 1.0), 1);
        assert_eq!(interval_index(edge(0.0, 1.0), 1.0), -1);
        assert_eq!(interval_index(edge(2.0, 0.5), 0.5), 1);
        assert_eq!(interval_index(edge(2.0, 0.5) + 1e-12, 0.5), 2);
        // Zero and the real axis are interior at every level.
        for level in 0..=MAX_COVER_DEPTH {
            let delta = delta_at(level);
            let k = interval_index(0.0, delta);
            let lo = GRID_ORIGIN - 1.0 + 2.0 * k as f64 * delta;
            assert!(-lo > 1e-7 && lo + 2.0 * delta > 1e-7, "level {level}");
        }
    }

    #[test]
    fn focused_cover_is_a_subset_of_the_full_cover() {
        let u = Region::open_disk(c64(1.0, 0.5), 1.3);
        let full = dyadic_cover(&u, CoverMap::Add, 4, 2.0).unwrap();
        let pts = [(c64(0.3, 0.1), c64(0.6, 0.2)), (c64(-0.2, 0.4), c64(1.4, 0.3))];
        let focused = dyadic_cover_focused(&u, CoverMap::Add, 4, &pts).unwrap();
        assert!(!focused.boxes.is_empty());
        for b in &focused.boxes {
            assert!(full.boxes.contains(b));
        }
        for (z, w) in pts {
            assert_eq!(focused.covers(z, w), full.covers(z, w));
        }
    }

    #[test]
    fn multiplicative_cover_passes_checks() {
        let u = Region::open_disk(c64(2.0, 0.0), 1.0);
        let cover = dyadic_cover(&u, CoverMap::Multiply { norm_bound: 2.0 }, 4, 2.0).unwrap();
        assert!(!cover.boxes.is_empty());
        assert!(verify_cover(&cover).passed());
    }

    #[test]
    fn depth_cap() {
        assert!(dyadic_cover(&Region::full(1), CoverMap::Add, 13, 1.0).is_err());
    }

    #[test]
    fn csv_header() {
        let u = Region::open_disk(c64(0.0, 0.0), 4.0);
        let cover = dyadic_cover(&u, CoverMap::Add, 0, 1.0).unwrap();
        assert!(cover.to_csv().starts_with("z_re,z_im,w_re,w_im,delta,level\n"));
    }
}
