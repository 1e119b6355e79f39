//! Lie-algebra 2-cocycles on the restricted linear algebra with values in
//! functions of `F`, the coboundary `b` relating them, and the lift of the
//! infinitesimal action to `Det₂`.

use std::sync::Arc;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::detbundle::{bundle_connection, BundlePoint, BundleTangent};
use crate::error::{shape_err, Error, Result};
use crate::grassmann::GrassmannPoint;
use crate::numkernel::{c64, check_finite, commutator, identity, max_abs, schatten_norm, trace, CMat, C64};
use crate::polarized::Polarization;
use crate::stiefel::{Frame, FrameTangent};

/// An element of the Lie algebra: any square matrix of ambient size.
#[derive(Debug, Clone, PartialEq)]
pub struct LieElement {
    x: CMat,
}

/// `‖pr+ X pr-‖₄` and `‖pr- X pr+‖₄`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LieDiagnostics {
    pub upper_right_l4: f64,
    pub lower_left_l4: f64,
}

impl LieElement {
    pub fn new(x: CMat) -> Result<Self> {
        if !x.is_square() {
            return Err(shape_err("LieElement::new", "square matrix", format!("{}x{}", x.nrows(), x.ncols())));
        }
        check_finite(&x, "Lie algebra element")?;
        Ok(LieElement { x })
    }

    pub fn matrix(&self) -> &CMat {
        &self.x
    }

    pub fn diagnostics(&self, pol: &Polarization) -> Result<LieDiagnostics> {
        let b = pol.split_blocks(&self.x)?;
        Ok(LieDiagnostics { upper_right_l4: schatten_norm(&b.b, 4.0)?, lower_left_l4: schatten_norm(&b.c, 4.0)? })
    }

    pub fn scale_add(&self, a: C64, other: &LieElement) -> Result<LieElement> {
        same_size(&self.x, &other.x, "scale_add")?;
        Ok(LieElement { x: &self.x * a + &other.x })
    }
}

fn same_size(a: &CMat, b: &CMat, op: &'static str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(shape_err(op, format!("{}x{}", a.nrows(), a.ncols()), format!("{}x{}", b.nrows(), b.ncols())));
    }
    Ok(())
}

/// `[X, Y] = XY - YX`.
pub fn bracket(x: &LieElement, y: &LieElement) -> Result<LieElement> {
    same_size(&x.x, &y.x, "bracket")?;
    Ok(LieElement { x: commutator(&x.x, &y.x) })
}

type PolyEval = dyn Fn(&CMat) -> Result<C64> + Send + Sync;

/// A polynomial function of the entries of `F` with a declared degree bound.
///
/// The evaluator takes a bare matrix because the module action probes it on
/// the line `F + s[F, X]`, which leaves the set of involutions.
#[derive(Clone)]
pub struct TracePolynomial {
    eval: Arc<PolyEval>,
    degree: usize,
}

impl TracePolynomial {
    pub fn new(degree: usize, eval: impl Fn(&CMat) -> Result<C64> + Send + Sync + 'static) -> Self {
        TracePolynomial { eval: Arc::new(eval), degree }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn eval(&self, f: &CMat) -> Result<C64> {
        (self.eval)(f)
    }
}

impl std::fmt::Debug for TracePolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TracePolynomial").field("degree", &self.degree).finish_non_exhaustive()
    }
}

fn check_args(pol: &Polarization, f: &CMat, xs: &[&LieElement], op: &'static str) -> Result<()> {
    pol.check_square(f, op)?;
    for x in xs {
        pol.check_square(&x.x, op)?;
    }
    Ok(())
}

fn deviation(pol: &Polarization, f: &CMat) -> CMat {
    f - pol.epsilon()
}

/// `(1/16) tr((F - ε)² ε [[ε, X], [ε, Y]])` for an arbitrary matrix `F`.
pub fn omega_a_at(pol: &Polarization, f: &CMat, x: &LieElement, y: &LieElement) -> Result<C64> {
    check_args(pol, f, &[x, y], "omega_A")?;
    let e = pol.epsilon();
    let d = deviation(pol, f);
    let c = commutator(&commutator(&e, &x.x), &commutator(&e, &y.x));
    Ok(trace(&(&d * &d * &e * c)) / 16.0)
}

/// `(1/16) tr((F - ε)² F [[F, X], [F, Y]])` for an arbitrary matrix `F`.
pub fn omega_g_at(pol: &Polarization, f: &CMat, x: &LieElement, y: &LieElement) -> Result<C64> {
    check_args(pol, f, &[x, y], "omega_G")?;
    let d = deviation(pol, f);
    let c = commutator(&commutator(f, &x.x), &commutator(f, &y.x));
    Ok(trace(&(&d * &d * f * c)) / 16.0)
}

/// `(1/16) tr((F - ε)³ ε [ε, X]) - (1/16) tr((F - ε)⁴ ε X)` for an arbitrary matrix `F`.
pub fn coboundary_b_at(pol: &Polarization, f: &CMat, x: &LieElement) -> Result<C64> {
    check_args(pol, f, &[x], "coboundary_b")?;
    let e = pol.epsilon();
    let d = deviation(pol, f);
    let d2 = &d * &d;
    let d3 = &d2 * &d;
    let d4 = &d2 * &d2;
    Ok((trace(&(d3 * &e * commutator(&e, &x.x))) - trace(&(d4 * &e * &x.x))) / 16.0)
}

pub fn omega_a(f: &GrassmannPoint, x: &LieElement, y: &LieElement) -> Result<C64> {
    omega_a_at(&f.polarization(), f.involution(), x, y)
}

/// `(1/8) tr_C([[ε, X], [ε, Y]] (ε - F))`.
pub fn omega_a_conditional(f: &GrassmannPoint, x: &LieElement, y: &LieElement) -> Result<C64> {
    let pol = f.polarization();
    check_args(&pol, f.involution(), &[x, y], "omega_A_conditional")?;
    let e = pol.epsilon();
    let c = commutator(&commutator(&e, &x.x), &commutator(&e, &y.x));
    Ok(pol.conditional_trace(&(c * (&e - f.involution())))? / 8.0)
}

pub fn omega_g(f: &GrassmannPoint, x: &LieElement, y: &LieElement) -> Result<C64> {
    omega_g_at(&f.polarization(), f.involution(), x, y)
}

pub fn coboundary_b(f: &GrassmannPoint, x: &LieElement) -> Result<C64> {
    coboundary_b_at(&f.polarization(), f.involution(), x)
}

/// `(1/16) tr((F - ε)³ (F + ε) ε [ε, X]) - (1/16) tr((F - ε)⁴ ε X)`, an
/// alternative closed form of `b` kept for comparison; it does not equal
/// the connection on the lift.
pub fn coboundary_b_alternative(f: &GrassmannPoint, x: &LieElement) -> Result<C64> {
    let pol = f.polarization();
    check_args(&pol, f.involution(), &[x], "coboundary_b_alternative")?;
    let e = pol.epsilon();
    let d = f.deviation();
    let d2 = &d * &d;
    let d3 = &d2 * &d;
    let d4 = &d2 * &d2;
    let first = trace(&(d3 * (f.involution() + &e) * &e * commutator(&e, &x.x)));
    Ok((first - trace(&(d4 * &e * &x.x))) / 16.0)
}

/// Spacing of the interpolation nodes of the module action.
pub const NODE_SPACING: f64 = 0.5;
/// Relative interpolation miss at the held-out node that flags a wrong degree.
pub const DEGREE_TOL: f64 = 1e-8;

/// `degree + 1` symmetric integer multiples of the spacing, plus one held-out node.
fn nodes(degree: usize) -> (Vec<f64>, f64) {
    let count = degree + 1;
    let half = (count / 2) as i64;
    let ks: Vec<i64> =
        if count % 2 == 1 { (-half..=half).collect() } else { (1..=half).flat_map(|k| [-k, k]).collect() };
    let outer = ks.iter().map(|k| k.abs()).max().unwrap_or(0) + 1;
    (ks.into_iter().map(|k| k as f64 * NODE_SPACING).collect(), outer as f64 * NODE_SPACING)
}

/// `(X·φ)(F) = Dφ(F)[[F, X]]`, exact for polynomials of the declared degree.
pub fn module_action(phi: &TracePolynomial, f: &GrassmannPoint, x: &LieElement) -> Result<C64> {
    let pol = f.polarization();
    pol.check_square(&x.x, "module_action")?;
    let v = commutator(f.involution(), &x.x);
    let norm = v.norm();
    if norm == 0.0 {
        return Ok(C64::default());
    }
    let u = &v / c64(norm, 0.0);
    let at = |s: f64| phi.eval(&(f.involution() + &u * c64(s, 0.0)));

    let (ss, held) = nodes(phi.degree);
    let m = ss.len();
    let values = ss.iter().map(|&s| at(s)).collect::<Result<Vec<_>>>()?;
    let vander = CMat::from_fn(m, m, |i, j| c64(ss[i].powi(j as i32), 0.0));
    let rhs = nalgebra::DVector::from_vec(values.clone());
    let coeffs = vander.lu().solve(&rhs).ok_or(Error::Singular { smallest: 0.0, threshold: 0.0 })?;

    let predicted: C64 = coeffs.iter().enumerate().map(|(j, c)| c * held.powi(j as i32)).sum();
    let actual = at(held)?;
    let scale = values.iter().map(|z| z.norm()).fold(actual.norm(), f64::max).max(1.0);
    let residual = (predicted - actual).norm() / scale;
    if residual > DEGREE_TOL {
        return Err(Error::DegreeMisdeclared { degree: phi.degree, residual });
    }
    Ok(if m > 1 { coeffs[1] * norm } else { C64::default() })
}

/// The two cocycles with their degree in `F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cocycle {
    /// `ω_A`, degree 2.
    Mr,
    /// `ω_G`, degree 5.
    Geometric,
}

impl Cocycle {
    pub fn degree(self) -> usize {
        match self {
            Cocycle::Mr => 2,
            Cocycle::Geometric => 5,
        }
    }

    pub fn eval_at(self, pol: &Polarization, f: &CMat, x: &LieElement, y: &LieElement) -> Result<C64> {
        match self {
            Cocycle::Mr => omega_a_at(pol, f, x, y),
            Cocycle::Geometric => omega_g_at(pol, f, x, y),
        }
    }

    pub fn eval(self, f: &GrassmannPoint, x: &LieElement, y: &LieElement) -> Result<C64> {
        self.eval_at(&f.polarization(), f.involution(), x, y)
    }

    /// `F ↦ ω(F; X, Y)` as a trace polynomial.
    pub fn polynomial(self, pol: Polarization, x: &LieElement, y: &LieElement) -> TracePolynomial {
        let (x, y) = (x.clone(), y.clone());
        TracePolynomial::new(self.degree(), move |f| self.eval_at(&pol, f, &x, &y))
    }
}

/// `F ↦ b(F; X)` as a degree-5 trace polynomial.
pub fn coboundary_polynomial(pol: Polarization, x: &LieElement) -> TracePolynomial {
    let x = x.clone();
    TracePolynomial::new(5, move |f| coboundary_b_at(&pol, f, &x))
}

/// `|ω([X,Y],Z) - ω([X,Z],Y) + ω([Y,Z],X) - X·ω(Y,Z) + Y·ω(X,Z) - Z·ω(X,Y)|`.
pub fn cocycle_residual(
    omega: Cocycle,
    f: &GrassmannPoint,
    x: &LieElement,
    y: &LieElement,
    z: &LieElement,
) -> Result<f64> {
    let pol = f.polarization();
    let algebraic =
        omega.eval(f, &bracket(x, y)?, z)? - omega.eval(f, &bracket(x, z)?, y)? + omega.eval(f, &bracket(y, z)?, x)?;
    let act = |a: &LieElement, b: &LieElement, c: &LieElement| module_action(&omega.polynomial(pol, b, c), f, a);
    let module = act(x, y, z)? - act(y, x, z)? + act(z, x, y)?;
    Ok((algebraic - module).norm())
}

/// The coboundary `δb(X, Y) = X·b(Y) - Y·b(X) - b([X, Y])`.
pub fn coboundary_delta_b(f: &GrassmannPoint, x: &LieElement, y: &LieElement) -> Result<C64> {
    let pol = f.polarization();
    let xby = module_action(&coboundary_polynomial(pol, y), f, x)?;
    let ybx = module_action(&coboundary_polynomial(pol, x), f, y)?;
    Ok(xby - ybx - coboundary_b(f, &bracket(x, y)?)?)
}

/// `|ω_A - ω_G - δb(X, Y)|`.
pub fn coboundary_relation_residual(f: &GrassmannPoint, x: &LieElement, y: &LieElement) -> Result<f64> {
    Ok((omega_a(f, x, y)? - omega_g(f, x, y)? - coboundary_delta_b(f, x, y)?).norm())
}

/// `|ω_A + ω_G + δb(X, Y)|`, the relation satisfied with the module action
/// along `[F, X]` and the lift `Xw - wX11` covering `-[F, X]`.
pub fn coboundary_relation_residual_opposite(f: &GrassmannPoint, x: &LieElement, y: &LieElement) -> Result<f64> {
    Ok((omega_a(f, x, y)? + omega_g(f, x, y)? + coboundary_delta_b(f, x, y)?).norm())
}

/// The lift of `X` to `Det₂` at `(w, 1)`: `(Xw - wX11, -tr(X12 (F21/2 - w-)))`.
pub fn fundamental_det2_lift(w: &Frame, x: &LieElement) -> Result<BundleTangent> {
    let pol = w.polarization();
    pol.check_square(&x.x, "fundamental_det2_lift")?;
    let xb = pol.split_blocks(&x.x)?;
    let f21 = pol.split_blocks(&w.involution())?.c;
    let frame_part = &x.x * w.matrix() - w.matrix() * &xb.a;
    let fiber = -trace(&(&xb.b * (f21 * c64(0.5, 0.0) - w.w_minus())));
    BundleTangent::new(FrameTangent::new(pol, frame_part)?, fiber)
}

/// `Â(w, 1)` on the lift of `X`.
pub fn connection_on_lift(w: &Frame, x: &LieElement) -> Result<C64> {
    let p = BundlePoint::new(w.clone(), c64(1.0, 0.0))?;
    bundle_connection(&p, &fundamental_det2_lift(w, x)?)
}

/// `|Â(lift of X) - b(F, X)|`.
pub fn b_via_connection_residual(w: &Frame, x: &LieElement) -> Result<f64> {
    let lift = connection_on_lift(w, x)?;
    let b = coboundary_b(&w.point()?, x)?;
    Ok((lift - b).norm())
}

/// Residuals of the frame identities with `x = w⁺ pr+`, `y = w⁺ pr-`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameIdentityReport {
    /// `x w+ + y w- = 1`
    pub partition: f64,
    /// `w+ x = (1 + F11)/2`
    pub upper_projection: f64,
    /// `F11 = 2 w+ x - 1`
    pub f11: f64,
    /// `F21 = 2 w- x`
    pub f21: f64,
}

impl FrameIdentityReport {
    pub fn max(&self) -> f64 {
        self.partition.max(self.upper_projection).max(self.f11).max(self.f21)
    }
}

pub fn frame_identities(w: &Frame) -> Result<FrameIdentityReport> {
    let pol = w.polarization();
    let n = pol.n_plus();
    let pinv = w.pinv();
    let x = pinv.columns(0, n).into_owned();
    let y = pinv.columns(n, pol.n_minus()).into_owned();
    let (wp, wm) = (w.w_plus(), w.w_minus());
    let f = pol.split_blocks(&w.involution())?;
    let one = identity(n);
    let wpx = &wp * &x;
    Ok(FrameIdentityReport {
        partition: max_abs(&(&x * &wp + &y * &wm - &one)),
        upper_projection: max_abs(&(&wpx - (&one + &f.a) * c64(0.5, 0.0))),
        f11: max_abs(&(&f.a - (&wpx * c64(2.0, 0.0) - &one))),
        f21: max_abs(&(&f.c - &wm * &x * c64(2.0, 0.0))),
    })
}

/// `h = [w | v]` with `v` an orthonormal basis of `W⊥`; returns `max|h ε h⁻¹ - F|`.
pub fn h_extension_residual(w: &Frame) -> Result<f64> {
    let pol = w.polarization();
    let n = pol.dim();
    let q = identity(n) - w.projection();
    let q = (&q + q.adjoint()) * c64(0.5, 0.0);
    let eig = SymmetricEigen::new(q);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut h = CMat::zeros(n, n);
    h.columns_mut(0, pol.n_plus()).copy_from(w.matrix());
    for (k, &i) in order.iter().take(pol.n_minus()).enumerate() {
        h.set_column(pol.n_plus() + k, &eig.eigenvectors.column(i));
    }
    let hinv = h.clone().try_inverse().ok_or(Error::Singular { smallest: 0.0, threshold: 0.0 })?;
    Ok(max_abs(&(&h * pol.epsilon() * hinv - w.involution())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detbundle::curvature_form;
    use crate::grassmann::{fundamental_field, random_point};
    use crate::numkernel::{sample_random, Rng, SampleKind};
    use crate::stiefel::{random_frame, random_gauge};
    use proptest::prelude::*;

    fn pol() -> Polarization {
        Polarization::symmetric(3).unwrap()
    }

    fn lie(rng: &mut Rng, n: usize) -> LieElement {
        LieElement::new(sample_random(SampleKind::General, n, rng)).unwrap()
    }

    fn e(i: usize, j: usize) -> LieElement {
        let mut m = CMat::zeros(2, 2);
        m[(i, j)] = c64(1.0, 0.0);
        LieElement::new(m).unwrap()
    }

    fn swap() -> GrassmannPoint {
        let f = CMat::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)]);
        GrassmannPoint::new(Polarization::symmetric(1).unwrap(), f).unwrap()
    }

    /// A frame of the plane spanned by `(1, 1)`.
    fn swap_frame() -> Frame {
        let w = CMat::from_row_slice(2, 1, &[c64(1.0, 0.0), c64(1.0, 0.0)]);
        Frame::new(Polarization::symmetric(1).unwrap(), w).unwrap()
    }

    fn setup(seed: u64) -> (GrassmannPoint, LieElement, LieElement, LieElement) {
        let mut rng = Rng::new(seed, 0);
        let f = random_point(pol(), 0.9, &mut rng).unwrap();
        (f, lie(&mut rng, 6), lie(&mut rng, 6), lie(&mut rng, 6))
    }

    #[test]
    fn lie_element_checks() {
        assert!(LieElement::new(CMat::zeros(2, 3)).is_err());
        let mut m = identity(2);
        m[(0, 1)] = c64(f64::NAN, 0.0);
        assert!(LieElement::new(m).is_err());
        let (_, x, _, _) = setup(60);
        let d = x.diagnostics(&pol()).unwrap();
        assert!(d.upper_right_l4 > 0.0 && d.lower_left_l4 > 0.0);
    }

    #[test]
    fn bracket_examples() {
        let (_, x, y, z) = setup(61);
        assert_eq!(max_abs(bracket(&x, &x).unwrap().matrix()), 0.0);
        assert_eq!(bracket(&e(0, 0), &e(0, 1)).unwrap(), e(0, 1));
        let jacobi = bracket(&x, &bracket(&y, &z).unwrap()).unwrap().matrix()
            + bracket(&y, &bracket(&z, &x).unwrap()).unwrap().matrix()
            + bracket(&z, &bracket(&x, &y).unwrap()).unwrap().matrix();
        assert!(max_abs(&jacobi) <= 1e-12);
        assert!(bracket(&x, &e(0, 0)).is_err());
    }

    #[test]
    fn hand_values() {
        let f = swap();
        assert_eq!(omega_a(&f, &e(0, 0), &e(0, 1)).unwrap(), C64::default());
        assert!((omega_g(&f, &e(0, 0), &e(0, 1)).unwrap() - c64(-0.5, 0.0)).norm() < 1e-15);
        assert!((coboundary_b(&f, &e(0, 0)).unwrap() - c64(-0.25, 0.0)).norm() < 1e-15);
        assert!((coboundary_b_alternative(&f, &e(0, 0)).unwrap() - c64(-0.25, 0.0)).norm() < 1e-15);
        assert!(coboundary_relation_residual(&f, &e(0, 0), &e(0, 1)).unwrap() <= 1e-10);
        assert!(coboundary_relation_residual_opposite(&f, &e(0, 0), &e(0, 1)).unwrap() <= 1e-10);
    }

    #[test]
    fn vanishing_at_base_point() {
        let (_, x, y, _) = setup(62);
        let b = GrassmannPoint::base(pol());
        assert_eq!(omega_a(&b, &x, &y).unwrap(), C64::default());
        assert_eq!(omega_a_conditional(&b, &x, &y).unwrap(), C64::default());
        assert_eq!(omega_g(&b, &x, &y).unwrap(), C64::default());
        assert_eq!(coboundary_b(&b, &x).unwrap(), C64::default());
        assert!(coboundary_relation_residual(&b, &x, &y).unwrap() <= 1e-12);
    }

    #[test]
    fn antisymmetry_and_equivalences() {
        let (f, x, y, _) = setup(63);
        for c in [Cocycle::Mr, Cocycle::Geometric] {
            assert!(c.eval(&f, &x, &x).unwrap().norm() <= 1e-12);
            assert!((c.eval(&f, &x, &y).unwrap() + c.eval(&f, &y, &x).unwrap()).norm() <= 1e-12);
        }
        assert!(omega_a_conditional(&f, &x, &x).unwrap().norm() <= 1e-12);
        assert!((omega_a(&f, &x, &y).unwrap() - omega_a_conditional(&f, &x, &y).unwrap()).norm() <= 1e-10);
        let dx = fundamental_field(&f, &x).unwrap();
        let dy = fundamental_field(&f, &y).unwrap();
        assert!((omega_g(&f, &x, &y).unwrap() + curvature_form(&f, &dx, &dy).unwrap()).norm() <= 1e-10);
    }

    #[test]
    fn b_is_linear() {
        let (f, x, y, _) = setup(64);
        let a = c64(0.7, -1.3);
        let lhs = coboundary_b(&f, &x.scale_add(a, &y).unwrap()).unwrap();
        let rhs = coboundary_b(&f, &x).unwrap() * a + coboundary_b(&f, &y).unwrap();
        assert!((lhs - rhs).norm() <= 1e-12);
    }

    #[test]
    fn module_action_examples() {
        let (f, x, _, _) = setup(65);
        let tr = TracePolynomial::new(1, |m: &CMat| Ok(trace(m)));
        assert!(module_action(&tr, &f, &x).unwrap().norm() <= 1e-12);
        let tr2 = TracePolynomial::new(2, |m: &CMat| Ok(trace(&(m * m))));
        assert!(module_action(&tr2, &f, &x).unwrap().norm() <= 1e-11);
        let e = pol().epsilon();
        let eps_f = TracePolynomial::new(1, move |m: &CMat| Ok(trace(&(&e * m))));
        let direct = trace(&(pol().epsilon() * commutator(f.involution(), x.matrix())));
        assert!((module_action(&eps_f, &f, &x).unwrap() - direct).norm() <= 1e-12);
    }

    #[test]
    fn module_action_matches_finite_differences() {
        let (f, x, y, z) = setup(66);
        let phi = Cocycle::Geometric.polynomial(pol(), &y, &z);
        let v = commutator(f.involution(), x.matrix());
        let fd =
            crate::numkernel::central_richardson(|s| phi.eval(&(f.involution() + &v * c64(s, 0.0))), 1e-3).unwrap();
        let exact = module_action(&phi, &f, &x).unwrap();
        assert!((fd.value - exact).norm() <= 1e-7 * exact.norm().max(1.0));
    }

    #[test]
    fn module_action_detects_wrong_degree() {
        let (f, x, y, z) = setup(67);
        let wrong = TracePolynomial::new(4, {
            let (y, z) = (y.clone(), z.clone());
            move |m: &CMat| omega_g_at(&pol(), m, &y, &z)
        });
        assert!(matches!(module_action(&wrong, &f, &x), Err(Error::DegreeMisdeclared { degree: 4, .. })));
        let e = pol().epsilon();
        let not_poly = TracePolynomial::new(5, move |m: &CMat| Ok((trace(&(&e * m)) * 2.0).exp()));
        assert!(matches!(module_action(&not_poly, &f, &x), Err(Error::DegreeMisdeclared { .. })));
    }

    #[test]
    fn node_layout() {
        assert_eq!(nodes(2), (vec![-0.5, 0.0, 0.5], 1.0));
        assert_eq!(nodes(5), (vec![-0.5, 0.5, -1.0, 1.0, -1.5, 1.5], 2.0));
        assert_eq!(nodes(4).0.len(), 5);
    }

    #[test]
    fn cocycle_conditions() {
        let (f, x, y, z) = setup(68);
        for c in [Cocycle::Mr, Cocycle::Geometric] {
            assert!(cocycle_residual(c, &f, &x, &y, &z).unwrap() <= 1e-9);
            assert!(cocycle_residual(c, &f, &x, &x, &z).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn coboundary_relation_signs() {
        let (f, x, y, _) = setup(69);
        assert!(coboundary_relation_residual_opposite(&f, &x, &y).unwrap() <= 1e-9);
        // with δb = -ω_A - ω_G the residual of ω_A - ω_G - δb is 2|ω_A|
        let literal = coboundary_relation_residual(&f, &x, &y).unwrap();
        assert!((literal - 2.0 * omega_a(&f, &x, &y).unwrap().norm()).abs() <= 1e-9);
        assert!(literal > 1e-3);
    }

    #[test]
    fn lift_examples() {
        let mut rng = Rng::new(70, 0);
        let s = Frame::standard(pol());
        let zero = LieElement::new(CMat::zeros(6, 6)).unwrap();
        let l = fundamental_det2_lift(&s, &zero).unwrap();
        assert_eq!((max_abs(l.x.matrix()), l.alpha), (0.0, C64::default()));

        let x = lie(&mut rng, 6);
        let l = fundamental_det2_lift(&s, &x).unwrap();
        let blocks = pol().split_blocks(x.matrix()).unwrap();
        assert_eq!(pol().upper(l.x.matrix()).unwrap(), CMat::zeros(3, 3));
        assert_eq!(pol().lower(l.x.matrix()).unwrap(), blocks.c);
        assert_eq!(l.alpha, C64::default());

        let mut diag = blocks.clone();
        diag.b.fill(C64::default());
        diag.c.fill(C64::default());
        let l = fundamental_det2_lift(&s, &LieElement::new(diag.assemble()).unwrap()).unwrap();
        assert_eq!((max_abs(l.x.matrix()), l.alpha), (0.0, C64::default()));
    }

    #[test]
    fn b_via_connection_examples() {
        let mut rng = Rng::new(71, 0);
        let x = lie(&mut rng, 6);
        let s = Frame::standard(pol());
        assert!(connection_on_lift(&s, &x).unwrap().norm() < 1e-15);
        assert!(b_via_connection_residual(&s, &x).unwrap() < 1e-15);

        let w = swap_frame();
        assert!((connection_on_lift(&w, &e(0, 0)).unwrap() - c64(-0.25, 0.0)).norm() <= 1e-14);
        assert!(b_via_connection_residual(&w, &e(0, 0)).unwrap() <= 1e-14);

        let w = random_frame(pol(), 0.9, 0.4, &mut rng).unwrap();
        assert!(b_via_connection_residual(&w, &x).unwrap() <= 1e-8);
        let wg = w.act(&random_gauge(3, 0.5, &mut rng).unwrap()).unwrap();
        let (a, b) = (connection_on_lift(&w, &x).unwrap(), connection_on_lift(&wg, &x).unwrap());
        assert!((a - b).norm() <= 1e-8);
        assert!(b_via_connection_residual(&wg, &x).unwrap() <= 1e-8);
    }

    #[test]
    fn alternative_b_differs_from_lift() {
        let mut rng = Rng::new(72, 0);
        let w = random_frame(pol(), 0.9, 0.4, &mut rng).unwrap();
        let x = lie(&mut rng, 6);
        let alt = coboundary_b_alternative(&w.point().unwrap(), &x).unwrap();
        assert!((alt - connection_on_lift(&w, &x).unwrap()).norm() > 1e-4);
    }

    #[test]
    fn frame_identity_examples() {
        let mut rng = Rng::new(73, 0);
        assert_eq!(frame_identities(&Frame::standard(pol())).unwrap().max(), 0.0);
        let w = random_frame(Polarization::new(2, 4).unwrap(), 1.1, 0.5, &mut rng).unwrap();
        assert!(frame_identities(&w).unwrap().max() <= 1e-10);
        assert!(h_extension_residual(&w).unwrap() <= 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn cocycle_condition_holds(seed in any::<u64>()) {
            let (f, x, y, z) = setup(seed);
            prop_assert!(cocycle_residual(Cocycle::Mr, &f, &x, &y, &z).unwrap() <= 1e-9);
            prop_assert!(cocycle_residual(Cocycle::Geometric, &f, &x, &y, &z).unwrap() <= 1e-9);
        }

        #[test]
        fn conditional_trace_form_agrees(seed in any::<u64>()) {
            let (f, x, y, _) = setup(seed);
            prop_assert!((omega_a(&f, &x, &y).unwrap() - omega_a_conditional(&f, &x, &y).unwrap()).norm() <= 1e-10);
        }

        #[test]
        fn b_equals_connection_on_lift(seed in any::<u64>()) {
            let mut rng = Rng::new(seed, 0);
            let w = random_frame(pol(), 0.9, 0.4, &mut rng).unwrap();
            prop_assert!(b_via_connection_residual(&w, &lie(&mut rng, 6)).unwrap() <= 1e-8);
        }

        #[test]
        fn frame_identities_hold(seed in any::<u64>()) {
            let mut rng = Rng::new(seed, 0);
            let w = random_frame(pol(), 0.9, 0.4, &mut rng).unwrap();
            prop_assert!(frame_identities(&w).unwrap().max() <= 1e-10);
        }
    }
}
