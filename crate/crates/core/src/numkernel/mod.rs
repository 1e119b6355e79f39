//! Dense complex linear algebra used by every other module.
//!
//! Matrices are `nalgebra` dynamic matrices over `Complex64`. The functions
//! here add the finiteness/shape checks and the handful of decompositions
//! the geometry needs: Schatten norms, determinants, the full-column-rank
//! pseudo-inverse and the matrix exponential.

mod expm;
mod fd;
mod json;
mod random;

pub use expm::matrix_exp;
pub use fd::{central_richardson, Derivative, FdValue};
pub use json::MatrixJson;
pub use random::{sample_random, sample_rect, Rng, SampleKind};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{shape_err, Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<Complex64>;

/// Relative rank tolerance: singular values below `RANK_TOL * sigma_max`
/// count as zero.
pub const RANK_TOL: f64 = 1e-10;

pub fn c64(re: f64, im: f64) -> C64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

/// Diagonal matrix with the given real entries.
pub fn real_diag(entries: &[f64]) -> CMat {
    let n = entries.len();
    CMat::from_fn(n, n, |i, j| if i == j { c64(entries[i], 0.0) } else { C64::default() })
}

pub fn check_finite(a: &CMat, what: &str) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} has non-finite entries")))
    }
}

pub fn check_square(a: &CMat, op: &'static str) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(shape_err(op, "square matrix", format!("{}x{}", a.nrows(), a.ncols())))
    }
}

pub(crate) fn check_same_shape(a: &CMat, b: &CMat, op: &'static str) -> Result<()> {
    if a.shape() == b.shape() {
        Ok(())
    } else {
        Err(shape_err(op, format!("{}x{}", a.nrows(), a.ncols()), format!("{}x{}", b.nrows(), b.ncols())))
    }
}

pub fn trace(a: &CMat) -> C64 {
    a.diagonal().iter().sum()
}

/// `ab - ba`.
pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Largest entry modulus; the residual measure used throughout.
pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Singular values in non-increasing order.
pub fn singular_values(a: &CMat) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn operator_norm(a: &CMat) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Schatten p-norm `(sum sigma_i^p)^(1/p)`.
pub fn schatten_norm(a: &CMat, p: f64) -> Result<f64> {
    check_finite(a, "schatten_norm argument")?;
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!("Schatten exponent must be >= 1, got {p}")));
    }
    let s = singular_values(a);
    let top = match s.first() {
        Some(&t) if t > 0.0 => t,
        _ => return Ok(0.0),
    };
    // factor out sigma_max so large p does not overflow
    let sum: f64 = s.iter().map(|&x| (x / top).powf(p)).sum();
    Ok(top * sum.powf(1.0 / p))
}

/// Determinant via LU with partial pivoting.
pub fn determinant(a: &CMat) -> Result<C64> {
    check_square(a, "determinant")?;
    if a.is_empty() {
        return Ok(c64(1.0, 0.0));
    }
    Ok(a.clone().lu().determinant())
}

/// Moore-Penrose inverse of a matrix with full column rank, so that
/// `pinv(a) * a = I`. Rank-deficient input is an error.
pub fn pseudo_inverse(a: &CMat) -> Result<CMat> {
    pseudo_inverse_with_tol(a, RANK_TOL)
}

pub fn pseudo_inverse_with_tol(a: &CMat, rel_tol: f64) -> Result<CMat> {
    check_finite(a, "pseudo_inverse argument")?;
    let (m, n) = a.shape();
    if n == 0 {
        return Ok(zeros(0, m));
    }
    if m < n {
        return Err(Error::Singular { smallest: 0.0, threshold: 0.0 });
    }
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let threshold = rel_tol * smax;
    if !(smin > threshold) {
        return Err(Error::Singular { smallest: smin, threshold });
    }
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let mut sigma_inv_ut = u.adjoint();
    for (j, s) in sv.iter().enumerate() {
        let mut row = sigma_inv_ut.row_mut(j);
        row *= c64(1.0 / s, 0.0);
    }
    Ok(v_t.adjoint() * sigma_inv_ut)
}

/// Rescales `a` so its operator norm equals `target` (zero stays zero).
pub fn with_operator_norm(a: &CMat, target: f64) -> CMat {
    let n = operator_norm(a);
    if n == 0.0 {
        a.clone()
    } else {
        a * c64(target / n, 0.0)
    }
}
