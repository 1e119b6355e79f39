use serde::{Deserialize, Serialize};

use super::{c64, CMat};
use crate::error::{Error, Result};

/// Row-major JSON form of a complex matrix:
/// `{"rows": n, "cols": m, "re": [...], "im": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&CMat> for MatrixJson {
    fn from(a: &CMat) -> Self {
        let (rows, cols) = a.shape();
        let mut re = Vec::with_capacity(rows * cols);
        let mut im = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                re.push(a[(i, j)].re);
                im.push(a[(i, j)].im);
            }
        }
        MatrixJson { rows, cols, re, im }
    }
}

impl TryFrom<&MatrixJson> for CMat {
    type Error = Error;

    fn try_from(m: &MatrixJson) -> Result<Self> {
        let len = m.rows * m.cols;
        if m.re.len() != len || m.im.len() != len {
            return Err(Error::InvalidInput(format!(
                "matrix JSON declares {}x{} but has {} real and {} imaginary entries",
                m.rows,
                m.cols,
                m.re.len(),
                m.im.len()
            )));
        }
        if m.re.iter().chain(&m.im).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("matrix JSON has non-finite entries".into()));
        }
        Ok(CMat::from_fn(m.rows, m.cols, |i, j| {
            let k = i * m.cols + j;
            c64(m.re[k], m.im[k])
        }))
    }
}
