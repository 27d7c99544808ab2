use serde::{Deserialize, Serialize};

use super::{c64, ensure_finite, CMatrix};
use crate::error::{Error, Result};

/// On-disk matrix layout: `{"d": int, "re": [[f64]], "im": [[f64]]}`.
///
/// `d` is the row count. Square operators have `d` columns; frames
/// (orthonormal bases of subspaces) may have any column count, including zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub d: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let re = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect()).collect();
        let im = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].im).collect()).collect();
        MatrixJson { d: m.nrows(), re, im }
    }

    /// Parse into a matrix with `d` rows. `cols` is taken from the rows.
    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.re.len() != self.d || self.im.len() != self.d {
            return Err(Error::Format(format!(
                "expected {} rows, found re={} im={}",
                self.d,
                self.re.len(),
                self.im.len()
            )));
        }
        let cols = self.re.first().map_or(0, Vec::len);
        for (r, i) in self.re.iter().zip(&self.im) {
            if r.len() != cols || i.len() != cols {
                return Err(Error::Format("ragged rows in matrix JSON".into()));
            }
        }
        let m = CMatrix::from_fn(self.d, cols, |i, j| c64(self.re[i][j], self.im[i][j]));
        ensure_finite(&m)?;
        Ok(m)
    }

    /// Parse and require a square `d x d` operator.
    pub fn to_square(&self) -> Result<CMatrix> {
        let m = self.to_matrix()?;
        if m.ncols() != self.d {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_square_matrix() {
        let text = r#"{"d": 2, "re": [[1, 0], [0, 2]], "im": [[0, 1], [0, 0]]}"#;
        let j: MatrixJson = serde_json::from_str(text).unwrap();
        let m = j.to_square().unwrap();
        assert_eq!(m[(0, 1)], c64(0.0, 1.0));
        assert_eq!(m[(1, 1)], c64(2.0, 0.0));
        assert_eq!(MatrixJson::from_matrix(&m), j);
    }

    #[test]
    fn rejects_wrong_row_count() {
        let j = MatrixJson { d: 3, re: vec![vec![1.0]], im: vec![vec![0.0]] };
        assert!(j.to_matrix().is_err());
    }

    #[test]
    fn empty_frame_round_trips() {
        let m = CMatrix::zeros(3, 0);
        let j = MatrixJson::from_matrix(&m);
        let back = j.to_matrix().unwrap();
        assert_eq!(back.shape(), (3, 0));
    }
}
