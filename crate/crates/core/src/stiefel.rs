//! Admissible frames `w : H+ → H`, tangent vectors to the frame space,
//! and the gauge group acting on the right.
//!
//! A frame caches its pseudo-inverse `w⁺ = (w*w)⁻¹w*` and the range
//! projection `P = w w⁺`; every connection-type quantity is built from those.

use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::grassmann::GrassmannPoint;
use crate::numkernel::{
    c64, check_finite, check_same_shape, identity, matrix_exp, pseudo_inverse, sample_random, sample_rect,
    schatten_norm, singular_values, with_operator_norm, CMat, MatrixJson, Rng, SampleKind, RANK_TOL,
};
use crate::polarized::Polarization;

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pol: Polarization,
    w: CMat,
    pinv: CMat,
    proj: CMat,
}

/// `‖pr+ w - 1‖₂` and `‖pr- w‖₄`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameDiagnostics {
    pub upper_minus_one_l2: f64,
    pub lower_l4: f64,
}

impl Frame {
    pub fn new(pol: Polarization, w: CMat) -> Result<Self> {
        if w.nrows() != pol.dim() || w.ncols() != pol.n_plus() {
            return Err(shape_err(
                "Frame::new",
                format!("{}x{}", pol.dim(), pol.n_plus()),
                format!("{}x{}", w.nrows(), w.ncols()),
            ));
        }
        check_finite(&w, "frame")?;
        let pinv = pseudo_inverse(&w)?;
        let proj = &w * &pinv;
        Ok(Frame { pol, w, pinv, proj })
    }

    /// `[I; 0]`, spanning `H+`.
    pub fn standard(pol: Polarization) -> Self {
        let mut w = CMat::zeros(pol.dim(), pol.n_plus());
        for i in 0..pol.n_plus() {
            w[(i, i)] = c64(1.0, 0.0);
        }
        Frame::new(pol, w).expect("standard frame is injective")
    }

    pub fn polarization(&self) -> Polarization {
        self.pol
    }

    pub fn matrix(&self) -> &CMat {
        &self.w
    }

    pub fn pinv(&self) -> &CMat {
        &self.pinv
    }

    pub fn projection(&self) -> &CMat {
        &self.proj
    }

    /// `w+ = pr+ w` as an `n+ × n+` block.
    pub fn w_plus(&self) -> CMat {
        self.pol.upper(&self.w).expect("shape checked")
    }

    /// `w- = pr- w` as an `n- × n+` block.
    pub fn w_minus(&self) -> CMat {
        self.pol.lower(&self.w).expect("shape checked")
    }

    /// `F = 2P - 1` for the spanned plane.
    pub fn involution(&self) -> CMat {
        let p = (&self.proj + self.proj.adjoint()) * c64(0.5, 0.0);
        p * c64(2.0, 0.0) - identity(self.pol.dim())
    }

    pub fn point(&self) -> Result<GrassmannPoint> {
        GrassmannPoint::new(self.pol, self.involution())
    }

    pub fn diagnostics(&self) -> FrameDiagnostics {
        FrameDiagnostics {
            upper_minus_one_l2: schatten_norm(&(self.w_plus() - identity(self.pol.n_plus())), 2.0).unwrap_or(f64::NAN),
            lower_l4: schatten_norm(&self.w_minus(), 4.0).unwrap_or(f64::NAN),
        }
    }

    /// Right action `w ↦ w g`.
    pub fn act(&self, g: &GaugeElement) -> Result<Frame> {
        if g.matrix().nrows() != self.pol.n_plus() {
            return Err(shape_err(
                "Frame::act",
                format!("{0}x{0}", self.pol.n_plus()),
                format!("{}", g.matrix().nrows()),
            ));
        }
        Frame::new(self.pol, &self.w * g.matrix())
    }

    pub fn to_json(&self) -> FrameJson {
        FrameJson { kind: "frame".into(), pol: self.pol, w: MatrixJson::from(&self.w) }
    }

    pub fn from_json(j: &FrameJson) -> Result<Self> {
        if j.kind != "frame" {
            return Err(Error::InvalidInput(format!("expected type frame, got {}", j.kind)));
        }
        Frame::new(j.pol, CMat::try_from(&j.w)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameJson {
    #[serde(rename = "type")]
    pub kind: String,
    pub pol: Polarization,
    pub w: MatrixJson,
}

/// A tangent vector at a frame: any matrix of the frame's shape.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTangent {
    x: CMat,
}

impl FrameTangent {
    pub fn new(pol: Polarization, x: CMat) -> Result<Self> {
        if x.nrows() != pol.dim() || x.ncols() != pol.n_plus() {
            return Err(shape_err(
                "FrameTangent::new",
                format!("{}x{}", pol.dim(), pol.n_plus()),
                format!("{}x{}", x.nrows(), x.ncols()),
            ));
        }
        check_finite(&x, "frame tangent")?;
        Ok(FrameTangent { x })
    }

    /// The vertical vector `w ξ`.
    pub fn vertical(w: &Frame, xi: &CMat) -> Result<Self> {
        FrameTangent::new(w.pol, w.matrix() * xi)
    }

    pub fn matrix(&self) -> &CMat {
        &self.x
    }

    pub fn zero(pol: Polarization) -> Self {
        FrameTangent { x: CMat::zeros(pol.dim(), pol.n_plus()) }
    }
}

/// An invertible `n+ × n+` matrix acting on frames from the right.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeElement {
    g: CMat,
}

impl GaugeElement {
    pub fn new(g: CMat) -> Result<Self> {
        if !g.is_square() {
            return Err(shape_err("GaugeElement::new", "square matrix", format!("{}x{}", g.nrows(), g.ncols())));
        }
        check_finite(&g, "gauge element")?;
        let s = singular_values(&g);
        let (largest, smallest) = (s.first().copied().unwrap_or(0.0), s.last().copied().unwrap_or(0.0));
        if !(smallest > RANK_TOL * largest) {
            return Err(Error::Singular { smallest, threshold: RANK_TOL * largest });
        }
        Ok(GaugeElement { g })
    }

    pub fn identity(n: usize) -> Self {
        GaugeElement { g: identity(n) }
    }

    pub fn matrix(&self) -> &CMat {
        &self.g
    }

    pub fn inverse(&self) -> Result<GaugeElement> {
        let inv = self.g.clone().try_inverse().ok_or(Error::Singular { smallest: 0.0, threshold: 0.0 })?;
        GaugeElement::new(inv)
    }

    pub fn compose(&self, h: &GaugeElement) -> GaugeElement {
        GaugeElement { g: &self.g * &h.g }
    }

    /// `‖g - 1‖₂`.
    pub fn distance_to_identity(&self) -> f64 {
        schatten_norm(&(&self.g - identity(self.g.nrows())), 2.0).unwrap_or(f64::NAN)
    }
}

/// `‖pr+(w1 - w2)‖₂ + ‖pr-(w1 - w2)‖₄`.
pub fn frame_metric(w1: &Frame, w2: &Frame) -> Result<f64> {
    if w1.pol != w2.pol {
        return Err(shape_err("frame_metric", format!("{:?}", w1.pol), format!("{:?}", w2.pol)));
    }
    check_same_shape(w1.matrix(), w2.matrix(), "frame_metric")?;
    let diff = w1.matrix() - w2.matrix();
    Ok(schatten_norm(&w1.pol.upper(&diff)?, 2.0)? + schatten_norm(&w1.pol.lower(&diff)?, 4.0)?)
}

/// Relative tolerance on `‖w2 - w1 g‖ / ‖w2‖` for two frames of one plane.
pub const FIBER_TOL: f64 = 1e-9;

/// The unique `g` with `w2 = w1 g`.
pub fn gauge_between(w1: &Frame, w2: &Frame) -> Result<GaugeElement> {
    if w1.pol != w2.pol {
        return Err(shape_err("gauge_between", format!("{:?}", w1.pol), format!("{:?}", w2.pol)));
    }
    let g = w1.pinv() * w2.matrix();
    let residual = schatten_norm(&(w2.matrix() - w1.matrix() * &g), 2.0)?;
    let scale = schatten_norm(w2.matrix(), 2.0)?;
    if residual > FIBER_TOL * scale {
        return Err(Error::NotSameFiber { residual: residual / scale });
    }
    GaugeElement::new(g)
}

fn check_tangent(w: &Frame, x: &FrameTangent, op: &'static str) -> Result<()> {
    if x.matrix().shape() != w.matrix().shape() {
        return Err(shape_err(
            op,
            format!("{}x{}", w.matrix().nrows(), w.matrix().ncols()),
            format!("{}x{}", x.matrix().nrows(), x.matrix().ncols()),
        ));
    }
    Ok(())
}

/// `(1 - P) X`.
fn perp(w: &Frame, x: &CMat) -> CMat {
    x - w.projection() * x
}

/// `Θ(X) = w⁺ X`.
pub fn theta_plain(w: &Frame, x: &FrameTangent) -> Result<CMat> {
    check_tangent(w, x, "theta_plain")?;
    Ok(w.pinv() * x.matrix())
}

/// `Θ(X) = w⁺ X + w⁺ pr+ (1 - P) X`.
pub fn theta_modified(w: &Frame, x: &FrameTangent) -> Result<CMat> {
    check_tangent(w, x, "theta_modified")?;
    let q = w.pol.apply_pr_plus(&perp(w, x.matrix()))?;
    Ok(w.pinv() * (x.matrix() + q))
}

/// `X - w Θ(X)` with the modified `Θ`; equals `(1-P)X - P pr+ (1-P)X`.
pub fn horizontal_projection(w: &Frame, x: &FrameTangent) -> Result<FrameTangent> {
    let theta = theta_modified(w, x)?;
    Ok(FrameTangent { x: x.matrix() - w.matrix() * theta })
}

/// Derivative of the range projection along `X`: `Q X w⁺ + (Q X w⁺)*`, `Q = 1 - P`.
pub fn dproj(w: &Frame, x: &FrameTangent) -> Result<CMat> {
    check_tangent(w, x, "dproj")?;
    let a = perp(w, x.matrix()) * w.pinv();
    Ok(&a + a.adjoint())
}

/// `w⁺ [dP(X1), dP(X2)] w`.
pub fn curvature_lemma_form(w: &Frame, x1: &FrameTangent, x2: &FrameTangent) -> Result<CMat> {
    let d1 = dproj(w, x1)?;
    let d2 = dproj(w, x2)?;
    Ok(w.pinv() * (&d1 * &d2 - &d2 * &d1) * w.matrix())
}

/// `exp(i · spread · H)` for a random Hermitian `H` of unit operator norm.
pub(crate) fn random_unitary_near_identity(n: usize, spread: f64, rng: &mut Rng) -> Result<CMat> {
    let h = with_operator_norm(&sample_random(SampleKind::Hermitian, n, rng), 1.0);
    matrix_exp(&(h * c64(0.0, spread)))
}

/// `1 + s G / ‖G‖_op` for a complex Gaussian `G`; invertible whenever `s < 1`.
pub fn random_gauge(n: usize, spread: f64, rng: &mut Rng) -> Result<GaugeElement> {
    if !(0.0..1.0).contains(&spread) {
        return Err(Error::InvalidInput(format!("gauge spread must lie in [0, 1), got {spread}")));
    }
    let g = with_operator_norm(&sample_rect(n, n, rng), spread);
    GaugeElement::new(identity(n) + g)
}

/// `w = u [I; 0] g` with `u = exp(i · spread · H)` and `g` a random gauge
/// element at distance `gauge_spread` (operator norm) from the identity.
pub fn random_frame(pol: Polarization, spread: f64, gauge_spread: f64, rng: &mut Rng) -> Result<Frame> {
    let u = random_unitary_near_identity(pol.dim(), spread, rng)?;
    let g = random_gauge(pol.n_plus(), gauge_spread, rng)?;
    let base = Frame::standard(pol);
    Frame::new(pol, u * base.matrix() * g.matrix())
}

/// A random tangent vector with entries of unit variance.
pub fn random_tangent(pol: Polarization, rng: &mut Rng) -> FrameTangent {
    FrameTangent { x: sample_rect(pol.dim(), pol.n_plus(), rng) }
}
