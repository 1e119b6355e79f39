//! Regularized determinants `det_n(1 + A) = det(1 + R_n(A))`, the twist
//! function `ω(w+, g)` of the gauge action on `Det₂`, and the transition
//! function `f` of the pre-line bundle.

use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::numkernel::{c64, check_square, determinant, identity, matrix_exp, operator_norm, trace, CMat, C64};
use crate::stiefel::{gauge_between, Frame, GaugeElement};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegDetValue {
    pub value: C64,
    pub n: u32,
}

/// `R_n(A) = (1 + A) exp(Σ_{j=1}^{n-1} (-1)^j A^j / j) - 1`.
pub fn remainder_rn(a: &CMat, n: u32) -> Result<CMat> {
    check_square(a, "remainder_rn")?;
    if n == 0 {
        return Err(Error::InvalidInput("regularization order must be at least 1".into()));
    }
    if n == 1 {
        return Ok(a.clone());
    }
    let dim = a.nrows();
    let mut sum = CMat::zeros(dim, dim);
    let mut power = identity(dim);
    for j in 1..n {
        power = &power * a;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum += &power * c64(sign / j as f64, 0.0);
    }
    Ok((identity(dim) + a) * matrix_exp(&sum)? - identity(dim))
}

/// `det_n(1 + A)`. A zero value means `1 + A` is singular.
pub fn det_n(a: &CMat, n: u32) -> Result<RegDetValue> {
    let r = remainder_rn(a, n)?;
    let value = determinant(&(identity(a.nrows()) + r))?;
    Ok(RegDetValue { value, n })
}

/// `det₂(1 + A)`.
pub fn det2(a: &CMat) -> Result<C64> {
    Ok(det_n(a, 2)?.value)
}

/// `exp(Σ_{k≥2} (-1)^{k+1} tr(A^k) / k)`, convergent for `‖A‖ < 1`.
pub fn det2_series(a: &CMat) -> Result<C64> {
    check_square(a, "det2_series")?;
    let norm = operator_norm(a);
    if !(norm < 1.0) {
        return Err(Error::InvalidInput(format!("series needs operator norm below 1, got {norm}")));
    }
    let mut sum = C64::default();
    let mut power = a.clone();
    let mut k = 1u32;
    // the tail after term k is bounded by dim · norm^(k+1) / (1 - norm)
    let dim = a.nrows().max(1) as f64;
    while dim * norm.powi(k as i32 + 1) / (1.0 - norm) > 1e-17 && k < 10_000 {
        k += 1;
        power = &power * a;
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        sum += trace(&power) * (sign / k as f64);
    }
    Ok(sum.exp())
}

/// Relative defect of `det₂((1+A)(1+B)) = det₂(1+A) det₂(1+B) e^{-tr AB}`.
pub fn anomaly_residual(a: &CMat, b: &CMat) -> Result<f64> {
    check_square(a, "anomaly_residual")?;
    if a.shape() != b.shape() {
        return Err(shape_err(
            "anomaly_residual",
            format!("{}x{}", a.nrows(), a.ncols()),
            format!("{}x{}", b.nrows(), b.ncols()),
        ));
    }
    let one = identity(a.nrows());
    let product = (&one + a) * (&one + b) - &one;
    let lhs = det2(&product)?;
    let rhs = det2(a)? * det2(b)? * (-trace(&(a * b))).exp();
    Ok((lhs - rhs).norm() / lhs.norm().max(1.0))
}

/// `ω(w+, g) = det₂(g) exp(-tr((w+ - 1)(g - 1)))`.
pub fn omega_twist(w_plus: &CMat, g: &GaugeElement) -> Result<C64> {
    let gm = g.matrix();
    check_square(w_plus, "omega_twist")?;
    if w_plus.shape() != gm.shape() {
        return Err(shape_err(
            "omega_twist",
            format!("{}x{}", gm.nrows(), gm.ncols()),
            format!("{}x{}", w_plus.nrows(), w_plus.ncols()),
        ));
    }
    let one = identity(gm.nrows());
    let g1 = gm - &one;
    let value = det2(&g1)? * (-trace(&((w_plus - &one) * &g1))).exp();
    if value == C64::default() || !value.is_finite() {
        return Err(Error::Singular { smallest: value.norm(), threshold: 0.0 });
    }
    Ok(value)
}

/// Relative defect of `ω(w+, gh) = ω(w+, g) ω(w+ g, h)`.
pub fn action_compatibility_residual(w_plus: &CMat, g: &GaugeElement, h: &GaugeElement) -> Result<f64> {
    let lhs = omega_twist(w_plus, &g.compose(h))?;
    let moved = w_plus * g.matrix();
    let rhs = omega_twist(w_plus, g)? * omega_twist(&moved, h)?;
    Ok((lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1e-300))
}

/// `f(w1, w2) = ω((w1)+, g)⁻¹` where `w2 = w1 g`.
pub fn preline_f(w1: &Frame, w2: &Frame) -> Result<C64> {
    let g = gauge_between(w1, w2)?;
    Ok(omega_twist(&w1.w_plus(), &g)?.inv())
}

/// `|f(w2,w3) f(w1,w3)⁻¹ f(w1,w2) - 1|`.
pub fn preline_cocycle_residual(w1: &Frame, w2: &Frame, w3: &Frame) -> Result<f64> {
    let v = preline_f(w2, w3)? / preline_f(w1, w3)? * preline_f(w1, w2)?;
    Ok((v - c64(1.0, 0.0)).norm())
}

/// `α = exp(-tr((1 - q⁻¹a)(w+ - 1) + q⁻¹b(F21/2 - w-)))` where `a, b` are the
/// top blocks of `g`.
pub fn alpha_mr(g: &CMat, q: &CMat, w: &Frame) -> Result<C64> {
    let pol = w.polarization();
    pol.check_square(g, "alpha_mr")?;
    let n = pol.n_plus();
    if q.shape() != (n, n) {
        return Err(shape_err("alpha_mr", format!("{n}x{n}"), format!("{}x{}", q.nrows(), q.ncols())));
    }
    let qinv = q.clone().try_inverse().ok_or(Error::Singular { smallest: 0.0, threshold: 0.0 })?;
    let blocks = pol.split_blocks(g)?;
    let f21 = pol.split_blocks(&w.involution())?.c;
    let one = identity(n);
    let first = (&one - &qinv * &blocks.a) * (w.w_plus() - &one);
    let second = &qinv * &blocks.b * (f21 * c64(0.5, 0.0) - w.w_minus());
    Ok((-trace(&(first + second))).exp())
}
