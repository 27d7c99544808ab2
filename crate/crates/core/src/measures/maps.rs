use serde::{Deserialize, Serialize};

use super::Polynomial;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

/// Maps between coordinate spaces used for push-forwards and preimages.
///
/// Every variant acts both on points of `C^n` and on commuting tuples of
/// operators, and the two actions correspond: the joint measure of the
/// transformed tuple is the push-forward of the joint measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "snake_case")]
pub enum MapDescriptor {
    /// `C^n -> C`, `z -> q(z)`.
    Polynomial { poly: Polynomial },
    /// `C^{n+1} -> C^n`, adds the last two coordinates.
    AddLast,
    /// `C^{n+1} -> C^n`, replaces the last two coordinates by `alpha z_n z_{n+1}`.
    MulLast { alpha: C64 },
    /// `C^2 -> C^2`, `(z, w) -> (alpha z, beta w)`.
    ScalePair { alpha: C64, beta: C64 },
    /// `C^n -> C^n`, output coordinate `k` is input coordinate `perm[k]` (0-based).
    Permutation { perm: Vec<usize> },
    /// `C^n -> C^{n+1}`, appends a copy of coordinate `index` (0-based).
    Duplicate { index: usize },
}

impl MapDescriptor {
    pub fn validate(&self) -> Result<()> {
        match self {
            MapDescriptor::Polynomial { poly } => poly.validate(),
            MapDescriptor::Permutation { perm } => {
                let mut seen = vec![false; perm.len()];
                for &p in perm {
                    if p >= perm.len() || seen[p] {
                        return Err(Error::InvalidMap(format!("{perm:?} is not a permutation")));
                    }
                    seen[p] = true;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Output dimension for an input of dimension `n`, or an error when the
    /// map does not accept `C^n`.
    pub fn output_dim(&self, n: usize) -> Result<usize> {
        let bad = |why: &str| Err(Error::DimensionMismatch(format!("{why} (input dimension {n})")));
        match self {
            MapDescriptor::Polynomial { poly } if poly.nvars == n => Ok(1),
            MapDescriptor::Polynomial { .. } => bad("polynomial arity"),
            MapDescriptor::AddLast | MapDescriptor::MulLast { .. } if n >= 2 => Ok(n - 1),
            MapDescriptor::AddLast | MapDescriptor::MulLast { .. } => bad("need at least two coordinates"),
            MapDescriptor::ScalePair { .. } if n == 2 => Ok(2),
            MapDescriptor::ScalePair { .. } => bad("scale pair acts on C^2"),
            MapDescriptor::Permutation { perm } if perm.len() == n => Ok(n),
            MapDescriptor::Permutation { .. } => bad("permutation length"),
            MapDescriptor::Duplicate { index } if *index < n => Ok(n + 1),
            MapDescriptor::Duplicate { .. } => bad("duplicate index out of range"),
        }
    }

    /// Input dimension implied by an output dimension, when the map fixes it.
    pub fn input_dim(&self, out: usize) -> Result<usize> {
        let n = match self {
            MapDescriptor::Polynomial { poly } => poly.nvars,
            MapDescriptor::AddLast | MapDescriptor::MulLast { .. } => out + 1,
            MapDescriptor::ScalePair { .. } => 2,
            MapDescriptor::Permutation { perm } => perm.len(),
            MapDescriptor::Duplicate { .. } => out.saturating_sub(1),
        };
        if self.output_dim(n)? != out {
            return Err(Error::DimensionMismatch(format!("map cannot produce C^{out}")));
        }
        Ok(n)
    }

    pub fn apply(&self, z: &[C64]) -> Result<Vec<C64>> {
        let n = z.len();
        self.output_dim(n)?;
        Ok(match self {
            MapDescriptor::Polynomial { poly } => vec![poly.eval(z)?],
            MapDescriptor::AddLast => {
                let mut out = z[..n - 1].to_vec();
                out[n - 2] = z[n - 2] + z[n - 1];
                out
            }
            MapDescriptor::MulLast { alpha } => {
                let mut out = z[..n - 1].to_vec();
                out[n - 2] = alpha * z[n - 2] * z[n - 1];
                out
            }
            MapDescriptor::ScalePair { alpha, beta } => vec![alpha * z[0], beta * z[1]],
            MapDescriptor::Permutation { perm } => perm.iter().map(|&p| z[p]).collect(),
            MapDescriptor::Duplicate { index } => {
                let mut out = z.to_vec();
                out.push(z[*index]);
                out
            }
        })
    }

    /// The corresponding transformation of an operator tuple.
    pub fn apply_to_tuple(&self, mats: &[CMatrix]) -> Result<Vec<CMatrix>> {
        let n = mats.len();
        self.output_dim(n)?;
        Ok(match self {
            MapDescriptor::Polynomial { poly } => vec![poly.eval_matrices(mats)?],
            MapDescriptor::AddLast => {
                let mut out = mats[..n - 1].to_vec();
                out[n - 2] = &mats[n - 2] + &mats[n - 1];
                out
            }
            MapDescriptor::MulLast { alpha } => {
                let mut out = mats[..n - 1].to_vec();
                out[n - 2] = (&mats[n - 2] * &mats[n - 1]) * *alpha;
                out
            }
            MapDescriptor::ScalePair { alpha, beta } => vec![&mats[0] * *alpha, &mats[1] * *beta],
            MapDescriptor::Permutation { perm } => perm.iter().map(|&p| mats[p].clone()).collect(),
            MapDescriptor::Duplicate { index } => {
                let mut out = mats.to_vec();
                out.push(mats[*index].clone());
                out
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    fn pt(v: &[f64]) -> Vec<C64> {
        v.iter().map(|&x| c64(x, 0.0)).collect()
    }

    #[test]
    fn point_actions() {
        assert_eq!(MapDescriptor::AddLast.apply(&pt(&[1.0, 2.0, 3.0])).unwrap(), pt(&[1.0, 5.0]));
        let m = MapDescriptor::MulLast { alpha: c64(2.0, 0.0) };
        assert_eq!(m.apply(&pt(&[1.0, 2.0, 3.0])).unwrap(), pt(&[1.0, 12.0]));
        let p = MapDescriptor::Permutation { perm: vec![2, 0, 1] };
        assert_eq!(p.apply(&pt(&[1.0, 2.0, 3.0])).unwrap(), pt(&[3.0, 1.0, 2.0]));
        let f = MapDescriptor::Duplicate { index: 0 };
        assert_eq!(f.apply(&pt(&[1.0, 2.0])).unwrap(), pt(&[1.0, 2.0, 1.0]));
    }

    #[test]
    fn invalid_permutation() {
        assert!(MapDescriptor::Permutation { perm: vec![0, 0] }.validate().is_err());
    }

    #[test]
    fn dimension_checks() {
        assert!(MapDescriptor::AddLast.apply(&pt(&[1.0])).is_err());
        assert!(MapDescriptor::Duplicate { index: 3 }.apply(&pt(&[1.0])).is_err());
        assert_eq!(MapDescriptor::AddLast.input_dim(1).unwrap(), 2);
        assert_eq!(MapDescriptor::Duplicate { index: 0 }.input_dim(3).unwrap(), 2);
    }

    #[test]
    fn json_is_tagged() {
        let m = MapDescriptor::ScalePair { alpha: c64(1.0, 0.0), beta: c64(0.0, 2.0) };
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"map\":\"scale_pair\""));
        let back: MapDescriptor = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
