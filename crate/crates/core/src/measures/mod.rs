//! Finitely supported probability measures on `C^n`: joint Brown measures,
//! push-forwards, products and convolutions.

mod extension;
mod maps;
mod matching;
mod polynomial;

pub use extension::verify_distribution_extension;
pub use maps::MapDescriptor;
pub use polynomial::{Monomial, Polynomial};

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::regions::Region;
use crate::spectral::JointDecomposition;
use crate::tol;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    #[serde(rename = "z")]
    pub point: Vec<C64>,
    #[serde(rename = "w")]
    pub weight: f64,
}

/// Probability measure with finitely many atoms.
///
/// Atoms are kept in lexicographic order of their points; atoms closer than
/// [`tol::MERGE`] are merged on construction, so two measures that are equal
/// as measures have equal atom lists.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomicMeasure {
    dim: usize,
    atoms: Vec<Atom>,
}

#[derive(Deserialize)]
struct MeasureJson {
    dim: usize,
    atoms: Vec<Atom>,
}

impl<'de> Deserialize<'de> for AtomicMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = MeasureJson::deserialize(de)?;
        AtomicMeasure::new(raw.dim, raw.atoms).map_err(serde::de::Error::custom)
    }
}

fn lex_cmp(a: &[C64], b: &[C64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

pub(crate) fn point_distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

impl AtomicMeasure {
    pub fn new(dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMeasure("dimension must be positive".into()));
        }
        let mut total = 0.0;
        for a in &atoms {
            if a.point.len() != dim {
                return Err(Error::InvalidMeasure(format!(
                    "atom in C^{} for a measure on C^{dim}",
                    a.point.len()
                )));
            }
            if !(a.weight.is_finite() && a.weight >= 0.0) {
                return Err(Error::InvalidMeasure(format!("weight {} is not a nonnegative number", a.weight)));
            }
            if a.point.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidMeasure("atom point is not finite".into()));
            }
            total += a.weight;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!("total mass {total} is not 1")));
        }
        Ok(AtomicMeasure { dim, atoms: merge(atoms) })
    }

    pub fn dirac(point: Vec<C64>) -> Self {
        AtomicMeasure { dim: point.len(), atoms: vec![Atom { point, weight: 1.0 }] }
    }

    /// Build from `(point, weight)` pairs.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (Vec<C64>, f64)>) -> Result<Self> {
        Self::new(dim, pairs.into_iter().map(|(point, weight)| Atom { point, weight }).collect())
    }

    /// One-dimensional measure from scalar atoms.
    pub fn from_scalars(pairs: &[(C64, f64)]) -> Result<Self> {
        Self::from_pairs(1, pairs.iter().map(|&(z, w)| (vec![z], w)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// Mass of a region, by exact membership of the atoms.
    pub fn mass_of(&self, region: &Region) -> Result<f64> {
        let mut m = 0.0;
        for a in &self.atoms {
            if region.contains(&a.point)? {
                m += a.weight;
            }
        }
        Ok(m)
    }

    /// CSV rows `re1,im1,...,ren,imn,weight` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (1..=self.dim).flat_map(|i| [format!("re{i}"), format!("im{i}")]).collect();
        let _ = writeln!(out, "{},weight", header.join(","));
        for a in &self.atoms {
            for z in &a.point {
                let _ = write!(out, "{:e},{:e},", z.re, z.im);
            }
            let _ = writeln!(out, "{:e}", a.weight);
        }
        out
    }
}

fn merge(mut atoms: Vec<Atom>) -> Vec<Atom> {
    atoms.retain(|a| a.weight > 0.0);
    atoms.sort_by(|a, b| lex_cmp(&a.point, &b.point));
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match out.iter_mut().find(|m| point_distance(&m.point, &a.point) < tol::MERGE) {
            Some(m) => m.weight += a.weight,
            None => out.push(a),
        }
    }
    out
}

/// Joint Brown measure of a decomposed commuting tuple: one atom per joint
/// cluster, weighted by multiplicity over dimension.
pub fn brown(dec: &JointDecomposition) -> AtomicMeasure {
    let d = dec.dim() as f64;
    let atoms = dec
        .clusters()
        .iter()
        .map(|c| Atom { point: c.point.clone(), weight: c.multiplicity as f64 / d })
        .collect();
    AtomicMeasure { dim: dec.arity(), atoms: merge(atoms) }
}

pub fn pushforward(mu: &AtomicMeasure, map: &MapDescriptor) -> Result<AtomicMeasure> {
    map.validate()?;
    let out_dim = map.output_dim(mu.dim)?;
    let mut atoms = Vec::with_capacity(mu.atoms.len());
    for a in &mu.atoms {
        atoms.push(Atom { point: map.apply(&a.point)?, weight: a.weight });
    }
    Ok(AtomicMeasure { dim: out_dim, atoms: merge(atoms) })
}

/// Product measure on `C^{m+n}`.
pub fn product_measure(mu: &AtomicMeasure, nu: &AtomicMeasure) -> AtomicMeasure {
    let mut atoms = Vec::with_capacity(mu.len() * nu.len());
    for a in &mu.atoms {
        for b in &nu.atoms {
            let mut p = a.point.clone();
            p.extend_from_slice(&b.point);
            atoms.push(Atom { point: p, weight: a.weight * b.weight });
        }
    }
    AtomicMeasure { dim: mu.dim + nu.dim, atoms: merge(atoms) }
}

fn ensure_scalar(mu: &AtomicMeasure) -> Result<()> {
    if mu.dim != 1 {
        return Err(Error::DimensionMismatch(format!("convolution needs measures on C, got C^{}", mu.dim)));
    }
    Ok(())
}

/// Additive convolution of two measures on `C`.
pub fn convolve_additive(mu: &AtomicMeasure, nu: &AtomicMeasure) -> Result<AtomicMeasure> {
    ensure_scalar(mu)?;
    ensure_scalar(nu)?;
    pushforward(&product_measure(mu, nu), &MapDescriptor::AddLast)
}

/// Multiplicative convolution of two measures on `C`.
pub fn convolve_multiplicative(mu: &AtomicMeasure, nu: &AtomicMeasure) -> Result<AtomicMeasure> {
    ensure_scalar(mu)?;
    ensure_scalar(nu)?;
    pushforward(&product_measure(mu, nu), &MapDescriptor::MulLast { alpha: C64::new(1.0, 0.0) })
}

/// Minimal-cost perfect matching distance.
///
/// The shorter atom list is padded with massless phantoms. Matching two real
/// atoms costs `|w - w'| + |z - z'|`; matching an atom with a phantom costs
/// its weight.
pub fn measure_distance(mu: &AtomicMeasure, nu: &AtomicMeasure) -> Result<f64> {
    if mu.dim != nu.dim {
        return Err(Error::DimensionMismatch(format!("measures on C^{} and C^{}", mu.dim, nu.dim)));
    }
    let n = mu.len().max(nu.len());
    if n == 0 {
        return Ok(0.0);
    }
    let mut cost = vec![vec![0.0; n]; n];
    for (i, row) in cost.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            *c = match (mu.atoms.get(i), nu.atoms.get(j)) {
                (Some(a), Some(b)) => (a.weight - b.weight).abs() + point_distance(&a.point, &b.point),
                (Some(a), None) => a.weight,
                (None, Some(b)) => b.weight,
                (None, None) => 0.0,
            };
        }
    }
    Ok(matching::min_cost_assignment(&cost))
}

/// Largest modulus of an atom of a measure on `C`.
pub fn modified_spectral_radius(mu: &AtomicMeasure) -> Result<f64> {
    ensure_scalar(mu)?;
    Ok(mu.atoms.iter().map(|a| a.point[0].norm()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    fn m1(pairs: &[(f64, f64)]) -> AtomicMeasure {
        AtomicMeasure::from_scalars(&pairs.iter().map(|&(z, w)| (c64(z, 0.0), w)).collect::<Vec<_>>()).unwrap()
    }

    fn m2(pairs: &[((f64, f64), f64)]) -> AtomicMeasure {
        AtomicMeasure::from_pairs(2, pairs.iter().map(|&((a, b), w)| (vec![c64(a, 0.0), c64(b, 0.0)], w))).unwrap()
    }

    #[test]
    fn construction_merges_close_atoms() {
        let mu = AtomicMeasure::from_scalars(&[(c64(1.0, 0.0), 0.5), (c64(1.0 + 1e-12, 0.0), 0.5)]).unwrap();
        assert_eq!(mu.len(), 1);
        assert_eq!(mu.atoms()[0].weight, 1.0);
    }

    #[test]
    fn construction_rejects_bad_mass() {
        assert!(AtomicMeasure::from_scalars(&[(c64(1.0, 0.0), 0.4)]).is_err());
        assert!(AtomicMeasure::from_scalars(&[(c64(1.0, 0.0), 1.5), (c64(2.0, 0.0), -0.5)]).is_err());
    }

    #[test]
    fn polynomial_pushforward() {
        let mu = m2(&[((1.0, 3.0), 0.5), ((2.0, 4.0), 0.5)]);
        let q = Polynomial::from_terms(2, &[(c64(1.0, 0.0), &[1, 1])]).unwrap();
        let out = pushforward(&mu, &MapDescriptor::Polynomial { poly: q }).unwrap();
        assert_eq!(measure_distance(&out, &m1(&[(3.0, 0.5), (8.0, 0.5)])).unwrap(), 0.0);
    }

    #[test]
    fn squaring_merges_symmetric_atoms() {
        let mu = m1(&[(1.0, 0.5), (-1.0, 0.5)]);
        let sq = Polynomial::univariate(&[c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)]);
        let out = pushforward(&mu, &MapDescriptor::Polynomial { poly: sq }).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out.atoms()[0].point[0], c64(1.0, 0.0));
        assert_eq!(out.atoms()[0].weight, 1.0);
    }

    #[test]
    fn add_map_pushforward() {
        let mu = m2(&[((1.0, 3.0), 0.5), ((2.0, 4.0), 0.5)]);
        let out = pushforward(&mu, &MapDescriptor::AddLast).unwrap();
        assert_eq!(measure_distance(&out, &m1(&[(4.0, 0.5), (6.0, 0.5)])).unwrap(), 0.0);
    }

    #[test]
    fn product_with_dirac_prepends_coordinate() {
        let nu = m1(&[(1.0, 0.5), (2.0, 0.5)]);
        let p = product_measure(&AtomicMeasure::dirac(vec![c64(0.0, 0.0)]), &nu);
        assert_eq!(measure_distance(&p, &m2(&[((0.0, 1.0), 0.5), ((0.0, 2.0), 0.5)])).unwrap(), 0.0);
        let q = product_measure(&nu, &m1(&[(3.0, 0.5), (4.0, 0.5)]));
        assert_eq!(q.len(), 4);
        assert!(q.atoms().iter().all(|a| a.weight == 0.25));
    }

    #[test]
    fn convolutions() {
        let mu = m1(&[(1.0, 0.5), (2.0, 0.5)]);
        let nu = m1(&[(3.0, 0.5), (4.0, 0.5)]);
        let sum = convolve_additive(&mu, &nu).unwrap();
        assert_eq!(measure_distance(&sum, &m1(&[(4.0, 0.25), (5.0, 0.5), (6.0, 0.25)])).unwrap(), 0.0);

        let shifted = convolve_additive(&m1(&[(7.0, 1.0)]), &mu).unwrap();
        assert_eq!(measure_distance(&shifted, &m1(&[(8.0, 0.5), (9.0, 0.5)])).unwrap(), 0.0);
        let same = convolve_multiplicative(&m1(&[(1.0, 1.0)]), &mu).unwrap();
        assert_eq!(measure_distance(&same, &mu).unwrap(), 0.0);

        assert!(convolve_additive(&m2(&[((0.0, 0.0), 1.0)]), &mu).is_err());
    }

    #[test]
    fn distance_cases() {
        let mu = m1(&[(1.0, 0.25), (2.0, 0.75)]);
        assert_eq!(measure_distance(&mu, &mu).unwrap(), 0.0);
        let reversed = AtomicMeasure::from_scalars(&[(c64(2.0, 0.0), 0.75), (c64(1.0, 0.0), 0.25)]).unwrap();
        assert_eq!(measure_distance(&mu, &reversed).unwrap(), 0.0);
        let eps = 1e-3;
        let d = measure_distance(&m1(&[(0.0, 1.0)]), &m1(&[(eps, 1.0)])).unwrap();
        assert!((d - eps).abs() < 1e-15);
        let d = measure_distance(&m1(&[(1.0, 1.0)]), &mu).unwrap();
        assert!((d - 1.5).abs() < 1e-15);
        assert_eq!(d, measure_distance(&mu, &m1(&[(1.0, 1.0)])).unwrap());
    }

    #[test]
    fn radius() {
        assert_eq!(modified_spectral_radius(&m1(&[(1.0, 0.5), (3.0, 0.5)])).unwrap(), 3.0);
        assert_eq!(modified_spectral_radius(&m1(&[(0.0, 1.0)])).unwrap(), 0.0);
        assert_eq!(modified_spectral_radius(&m1(&[(-2.0, 1.0)])).unwrap(), 2.0);
    }

    #[test]
    fn json_schema() {
        let mu = m2(&[((1.0, 3.0), 0.5), ((2.0, 4.0), 0.5)]);
        let s = serde_json::to_string(&mu).unwrap();
        assert!(s.starts_with("{\"dim\":2,\"atoms\":[{\"z\":[[1.0,0.0],[3.0,0.0]],\"w\":0.5}"));
        let back: AtomicMeasure = serde_json::from_str(&s).unwrap();
        assert_eq!(back, mu);
        assert!(serde_json::from_str::<AtomicMeasure>(r#"{"dim":1,"atoms":[{"z":[[0,0]],"w":0.3}]}"#).is_err());
    }

    #[test]
    fn csv_export() {
        let csv = m1(&[(1.0, 1.0)]).to_csv();
        assert_eq!(csv.lines().next().unwrap(), "re1,im1,weight");
        assert_eq!(csv.lines().count(), 2);
    }
}
