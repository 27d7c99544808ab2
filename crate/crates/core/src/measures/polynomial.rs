use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    /// Exponent of each variable.
    #[serde(rename = "exp")]
    pub exponents: Vec<u32>,
    #[serde(rename = "c")]
    pub coeff: C64,
}

/// Polynomial `C^n -> C` given by a finite list of monomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub nvars: usize,
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(nvars: usize, terms: Vec<Monomial>) -> Result<Self> {
        let p = Polynomial { nvars, terms };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for t in &self.terms {
            if t.exponents.len() != self.nvars {
                return Err(Error::InvalidMap(format!(
                    "monomial has {} exponents, polynomial has {} variables",
                    t.exponents.len(),
                    self.nvars
                )));
            }
            if !t.coeff.re.is_finite() || !t.coeff.im.is_finite() {
                return Err(Error::InvalidMap("non-finite coefficient".into()));
            }
        }
        Ok(())
    }

    /// Build from `(coefficient, exponents)` pairs.
    pub fn from_terms(nvars: usize, terms: &[(C64, &[u32])]) -> Result<Self> {
        Self::new(
            nvars,
            terms.iter().map(|(c, e)| Monomial { exponents: e.to_vec(), coeff: *c }).collect(),
        )
    }

    /// Univariate polynomial with `coeffs[k]` multiplying `z^k`.
    pub fn univariate(coeffs: &[C64]) -> Self {
        let terms = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() != 0.0)
            .map(|(k, c)| Monomial { exponents: vec![k as u32], coeff: *c })
            .collect();
        Polynomial { nvars: 1, terms }
    }

    /// `sum_i alpha_i z_i`.
    pub fn linear(alpha: &[C64]) -> Self {
        let n = alpha.len();
        let terms = alpha
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let mut e = vec![0; n];
                e[i] = 1;
                Monomial { exponents: e, coeff: *a }
            })
            .collect();
        Polynomial { nvars: n, terms }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|t| t.exponents.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, z: &[C64]) -> Result<C64> {
        if z.len() != self.nvars {
            return Err(Error::DimensionMismatch(format!(
                "polynomial in {} variables evaluated at a point of C^{}",
                self.nvars,
                z.len()
            )));
        }
        let mut acc = C64::new(0.0, 0.0);
        for t in &self.terms {
            let mut m = t.coeff;
            for (x, &e) in z.iter().zip(&t.exponents) {
                m *= x.powu(e);
            }
            acc += m;
        }
        Ok(acc)
    }

    /// Evaluate on a commuting tuple of matrices.
    ///
    /// Each monomial is formed left-to-right over the variables and again
    /// right-to-left; the two results must agree to `1e-10` relative to the
    /// scale `sum |c| prod ||T_i||^e_i`, otherwise the tuple is not
    /// commuting enough for the value to be well defined.
    pub fn eval_matrices(&self, mats: &[CMatrix]) -> Result<CMatrix> {
        if mats.len() != self.nvars {
            return Err(Error::DimensionMismatch(format!(
                "polynomial in {} variables applied to {} operators",
                self.nvars,
                mats.len()
            )));
        }
        let d = mats.first().map(|m| m.nrows()).ok_or_else(|| Error::InvalidMap("no operators".into()))?;
        let mut powers: Vec<Vec<CMatrix>> = Vec::with_capacity(self.nvars);
        for (i, m) in mats.iter().enumerate() {
            let max_e = self.terms.iter().map(|t| t.exponents[i]).max().unwrap_or(0) as usize;
            let mut p = vec![CMatrix::identity(d, d)];
            for k in 1..=max_e {
                p.push(&p[k - 1] * m);
            }
            powers.push(p);
        }
        let norms: Vec<f64> = mats.iter().map(|m| m.norm()).collect();
        let mut forward = CMatrix::zeros(d, d);
        let mut backward = CMatrix::zeros(d, d);
        let mut scale = 0.0;
        for t in &self.terms {
            let mut f = CMatrix::identity(d, d);
            let mut b = CMatrix::identity(d, d);
            let mut s = t.coeff.norm();
            for i in 0..self.nvars {
                let e = t.exponents[i] as usize;
                if e > 0 {
                    f = &f * &powers[i][e];
                    s *= norms[i].powi(e as i32);
                }
                let j = self.nvars - 1 - i;
                let ej = t.exponents[j] as usize;
                if ej > 0 {
                    b = &b * &powers[j][ej];
                }
            }
            forward += f * t.coeff;
            backward += b * t.coeff;
            scale += s;
        }
        let mismatch = (&forward - &backward).norm();
        if mismatch > 1e-10 * scale.max(1.0) {
            return Err(Error::InvalidMap(format!(
                "polynomial value depends on operator ordering (mismatch {mismatch:.3e})"
            )));
        }
        Ok(forward)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, diag, real_matrix};

    #[test]
    fn evaluates_worked_example_polynomial() {
        let q = Polynomial::from_terms(
            3,
            &[(c64(1.0, 0.0), &[0, 0, 0]), (c64(2.0, 0.0), &[0, 2, 0]), (c64(1.0, 0.0), &[1, 1, 1])],
        )
        .unwrap();
        let v = q.eval(&[c64(1.0, 0.0), c64(2.0, 0.0), c64(3.0, 0.0)]).unwrap();
        assert_eq!(v, c64(1.0 + 8.0 + 6.0, 0.0));
        assert_eq!(q.total_degree(), 3);
    }

    #[test]
    fn matrix_evaluation_on_diagonals_is_entrywise() {
        let q = Polynomial::from_terms(2, &[(c64(1.0, 0.0), &[1, 1])]).unwrap();
        let a = diag(&[c64(1.0, 0.0), c64(2.0, 0.0)]);
        let b = diag(&[c64(3.0, 0.0), c64(4.0, 0.0)]);
        let m = q.eval_matrices(&[a, b]).unwrap();
        assert_eq!(m, diag(&[c64(3.0, 0.0), c64(8.0, 0.0)]));
    }

    #[test]
    fn ordering_dependence_is_detected() {
        let q = Polynomial::from_terms(2, &[(c64(1.0, 0.0), &[1, 1])]).unwrap();
        let a = real_matrix(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let b = real_matrix(&[&[0.0, 0.0], &[1.0, 0.0]]);
        assert!(q.eval_matrices(&[a, b]).is_err());
    }

    #[test]
    fn exponent_arity_is_validated() {
        assert!(Polynomial::from_terms(2, &[(c64(1.0, 0.0), &[1])]).is_err());
    }
}
