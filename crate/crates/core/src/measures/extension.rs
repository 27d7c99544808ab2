//! Consistency of the box function `ν(A, B) = τ(P_S(A) ∧ P_T(B))` on dyadic
//! grids, and reconstruction of the joint measure from it.

use std::collections::HashMap;

use super::{brown, measure_distance, AtomicMeasure};
use crate::error::{Error, Result};
use crate::linalg::{Subspace, C64};
use crate::regions::Region;
use crate::report::Report;
use crate::spectral::JointDecomposition;

/// Deepest level used when separating marginal atoms for reconstruction.
const MAX_REFINE_LEVEL: u32 = 48;

type Cell = (i64, i64);

/// Dyadic grid on a square of `C`, with a deliberately generic lower corner so
/// that cell boundaries avoid round numbers.
struct Grid {
    lo: f64,
    width: f64,
}

impl Grid {
    fn covering(points: &[C64]) -> Self {
        let m = points.iter().map(|z| z.re.abs().max(z.im.abs())).fold(0.0, f64::max) + 1.0;
        Grid { lo: -m - 0.013_579_246_8 * m, width: 2.0 * m + 0.05 * m }
    }

    fn delta(&self, level: u32) -> f64 {
        0.5 * self.width * (-(level as f64)).exp2()
    }

    fn index(&self, x: f64, level: u32) -> i64 {
        ((x - self.lo) / (2.0 * self.delta(level))).ceil() as i64 - 1
    }

    fn cell_of(&self, z: C64, level: u32) -> Cell {
        (self.index(z.re, level), self.index(z.im, level))
    }

    fn region(&self, cell: Cell, level: u32) -> Region {
        let delta = self.delta(level);
        let c = |k: i64| self.lo + (2 * k + 1) as f64 * delta;
        Region::square(C64::new(c(cell.0), c(cell.1)), delta)
    }
}

fn parent(cell: Cell) -> Cell {
    (cell.0.div_euclid(2), cell.1.div_euclid(2))
}

/// Single-operator projections onto grid cells, computed once each.
struct Marginal {
    dec: JointDecomposition,
    atoms: Vec<C64>,
    cache: HashMap<(u32, Cell), Subspace>,
}

impl Marginal {
    fn new(dec: JointDecomposition) -> Self {
        let atoms = dec.clusters().iter().map(|c| c.point[0]).collect();
        Marginal { dec, atoms, cache: HashMap::new() }
    }

    fn occupied(&self, grid: &Grid, level: u32) -> Vec<Cell> {
        let mut cells: Vec<Cell> = self.atoms.iter().map(|&z| grid.cell_of(z, level)).collect();
        cells.sort_unstable();
        cells.dedup();
        cells
    }

    fn projection(&mut self, grid: &Grid, level: u32, cell: Cell) -> Result<&Subspace> {
        if !self.cache.contains_key(&(level, cell)) {
            let p = self.dec.spectral_projection(&grid.region(cell, level))?;
            self.cache.insert((level, cell), p);
        }
        Ok(&self.cache[&(level, cell)])
    }

    /// For each atom, the coarsest cell at or below `level` holding no other atom.
    fn resolved_cells(&self, grid: &Grid, level: u32) -> Result<Vec<(u32, Cell)>> {
        let mut out = Vec::with_capacity(self.atoms.len());
        for (i, &z) in self.atoms.iter().enumerate() {
            let mut l = level;
            loop {
                let cell = grid.cell_of(z, l);
                let alone = self
                    .atoms
                    .iter()
                    .enumerate()
                    .all(|(j, &w)| j == i || grid.cell_of(w, l) != cell);
                if alone {
                    out.push((l, cell));
                    break;
                }
                if l >= MAX_REFINE_LEVEL {
                    return Err(Error::DecompositionFailed {
                        reason: "marginal atoms cannot be separated by the grid".into(),
                        residual: (z - self.atoms[(i + 1) % self.atoms.len()]).norm(),
                    });
                }
                l += 1;
            }
        }
        Ok(out)
    }
}

fn meet_rank(a: &Subspace, b: &Subspace) -> Result<usize> {
    if a.is_zero() || b.is_zero() {
        return Ok(0);
    }
    Ok(a.meet(b)?.dim())
}

/// Checks the box function of a pair on grids of levels `0..=grid_depth`:
/// separate additivity in each argument across one level of refinement, the
/// marginal identities, and that the atomic measure read off the finest grid
/// (refined adaptively until marginal atoms are isolated) is `brown(dec)`.
pub fn verify_distribution_extension(dec: &JointDecomposition, grid_depth: u32) -> Result<Report> {
    if dec.arity() != 2 {
        return Err(Error::DimensionMismatch("distribution extension takes a pair (S, T)".into()));
    }
    let mut report = Report::new("distribution extension");
    let d = dec.dim();
    let mut ms = Marginal::new(dec.marginal(0)?);
    let mut mt = Marginal::new(dec.marginal(1)?);
    let mut all: Vec<C64> = ms.atoms.clone();
    all.extend_from_slice(&mt.atoms);
    let grid = Grid::covering(&all);

    let mut nu: HashMap<(u32, Cell, u32, Cell), usize> = HashMap::new();
    let mut box_fn = |ms: &mut Marginal, mt: &mut Marginal, la: u32, a: Cell, lb: u32, b: Cell| -> Result<usize> {
        if let Some(&r) = nu.get(&(la, a, lb, b)) {
            return Ok(r);
        }
        let pa = ms.projection(&grid, la, a)?.clone();
        let r = meet_rank(&pa, mt.projection(&grid, lb, b)?)?;
        nu.insert((la, a, lb, b), r);
        Ok(r)
    };

    let mut add_fail_b = 0usize;
    let mut add_fail_a = 0usize;
    let mut marg_fail = 0usize;
    for level in 0..=grid_depth {
        let sa = ms.occupied(&grid, level);
        let tb = mt.occupied(&grid, level);
        for &a in &sa {
            let pa_rank = ms.projection(&grid, level, a)?.dim();
            let mut row = 0;
            for &b in &tb {
                row += box_fn(&mut ms, &mut mt, level, a, level, b)?;
            }
            if row != pa_rank {
                marg_fail += 1;
            }
        }
        for &b in &tb {
            let pb_rank = mt.projection(&grid, level, b)?.dim();
            let mut col = 0;
            for &a in &sa {
                col += box_fn(&mut ms, &mut mt, level, a, level, b)?;
            }
            if col != pb_rank {
                marg_fail += 1;
            }
        }
        if level == grid_depth {
            continue;
        }
        let sa_next = ms.occupied(&grid, level + 1);
        let tb_next = mt.occupied(&grid, level + 1);
        for &a in &sa {
            for &b in &tb {
                let whole = box_fn(&mut ms, &mut mt, level, a, level, b)?;
                let mut split_b = 0;
                for &b2 in tb_next.iter().filter(|&&c| parent(c) == b) {
                    split_b += box_fn(&mut ms, &mut mt, level, a, level + 1, b2)?;
                }
                let mut split_a = 0;
                for &a2 in sa_next.iter().filter(|&&c| parent(c) == a) {
                    split_a += box_fn(&mut ms, &mut mt, level + 1, a2, level, b)?;
                }
                add_fail_b += (split_b != whole) as usize;
                add_fail_a += (split_a != whole) as usize;
            }
        }
    }
    report.check_eq("additive in the second argument (violations)", add_fail_b, 0);
    report.check_eq("additive in the first argument (violations)", add_fail_a, 0);
    report.check_eq("marginals of the box function (violations)", marg_fail, 0);

    let cells_s = ms.resolved_cells(&grid, grid_depth)?;
    let cells_t = mt.resolved_cells(&grid, grid_depth)?;
    let mut pairs = Vec::new();
    let mut total = 0usize;
    for (i, &(la, a)) in cells_s.iter().enumerate() {
        for (j, &(lb, b)) in cells_t.iter().enumerate() {
            let r = box_fn(&mut ms, &mut mt, la, a, lb, b)?;
            if r > 0 {
                total += r;
                pairs.push((vec![ms.atoms[i], mt.atoms[j]], r as f64 / d as f64));
            }
        }
    }
    report.check_eq("reconstructed mass equals dimension", total, d);
    let rebuilt = AtomicMeasure::from_pairs(2, pairs)?;
    report.check_le("reconstruction equals joint Brown measure", measure_distance(&rebuilt, &brown(dec))?, 1e-10);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, diag};
    use crate::spectral::CommutingTuple;

    fn pair(s: &[C64], t: &[C64]) -> JointDecomposition {
        JointDecomposition::compute(&CommutingTuple::new(vec![diag(s), diag(t)]).unwrap()).unwrap()
    }

    fn assert_pass(r: &Report) {
        let failures: Vec<_> = r.failures().collect();
        assert!(failures.is_empty(), "{}: {failures:?}", r.name);
    }

    #[test]
    fn diagonal_pair_depth_3() {
        let re = |v: &[f64]| v.iter().map(|&x| c64(x, 0.0)).collect::<Vec<_>>();
        let dec = pair(&re(&[1.0, 2.0, 2.0, 3.0]), &re(&[3.0, 4.0, 5.0, 4.0]));
        assert_pass(&verify_distribution_extension(&dec, 3).unwrap());
    }

    #[test]
    fn diagonal_support_when_s_equals_t() {
        let v = [c64(0.5, 0.5), c64(-1.0, 0.25), c64(0.5, 0.5)];
        let dec = pair(&v, &v);
        assert_pass(&verify_distribution_extension(&dec, 4).unwrap());
        assert!(brown(&dec).atoms().iter().all(|a| (a.point[0] - a.point[1]).norm() < 1e-12));
    }

    #[test]
    fn single_cluster() {
        let v = [c64(0.3, 0.0); 3];
        let dec = pair(&v, &[c64(-0.2, 0.1); 3]);
        assert_pass(&verify_distribution_extension(&dec, 5).unwrap());
    }
}
