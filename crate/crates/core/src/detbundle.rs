//! The `Det₂` pre-line bundle over the frame space: gauge action, the
//! connection 1-form, its curvature and the finite-difference machinery used
//! to differentiate forms along parameter families.

use std::sync::Arc;

use crate::error::{shape_err, Error, Result};
use crate::grassmann::{GrassmannPoint, PointTangent};
use crate::numkernel::{c64, central_richardson, identity, max_abs, sample_rect, trace, CMat, C64};
use crate::polarized::Polarization;
use crate::regdet::{omega_twist, preline_f};
use crate::stiefel::{
    curvature_lemma_form, dproj, gauge_between, horizontal_projection, random_frame, random_gauge, theta_modified,
    theta_plain, Frame, FrameTangent, GaugeElement,
};

/// Richardson disagreement above `INSTABILITY_RATIO · max(1, |value|)` is an error.
pub const INSTABILITY_RATIO: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct BundlePoint {
    w: Frame,
    z: C64,
}

impl BundlePoint {
    pub fn new(w: Frame, z: C64) -> Result<Self> {
        if z == C64::default() || !z.is_finite() {
            return Err(Error::InvalidInput(format!("fiber coordinate must be finite and nonzero, got {z}")));
        }
        Ok(BundlePoint { w, z })
    }

    pub fn frame(&self) -> &Frame {
        &self.w
    }

    pub fn z(&self) -> C64 {
        self.z
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BundleTangent {
    pub x: FrameTangent,
    pub alpha: C64,
}

impl BundleTangent {
    pub fn new(x: FrameTangent, alpha: C64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::InvalidInput("fiber component is not finite".into()));
        }
        Ok(BundleTangent { x, alpha })
    }
}

type Evaluator<T> = dyn Fn(&[f64]) -> Result<T> + Send + Sync;

/// A smooth map from `[-1, 1]^k`, `k ∈ {1, 2, 3}`, into some space of jets.
#[derive(Clone)]
pub struct ParamFamily<T> {
    k: usize,
    eval: Arc<Evaluator<T>>,
}

impl<T> ParamFamily<T> {
    pub fn new(k: usize, eval: impl Fn(&[f64]) -> Result<T> + Send + Sync + 'static) -> Result<Self> {
        if !(1..=3).contains(&k) {
            return Err(Error::InvalidInput(format!("families have 1 to 3 parameters, got {k}")));
        }
        Ok(ParamFamily { k, eval: Arc::new(eval) })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn eval(&self, params: &[f64]) -> Result<T> {
        if params.len() != self.k {
            return Err(shape_err("ParamFamily::eval", format!("{} parameters", self.k), format!("{}", params.len())));
        }
        if params.iter().any(|p| !(-1.0..=1.0).contains(p)) {
            return Err(Error::InvalidInput(format!("parameters {params:?} leave [-1, 1]")));
        }
        (self.eval)(params)
    }
}

impl<T> std::fmt::Debug for ParamFamily<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ParamFamily").field("k", &self.k).finish_non_exhaustive()
    }
}

/// A frame together with its coordinate partial derivatives.
#[derive(Debug, Clone)]
pub struct FrameJet {
    pub frame: Frame,
    pub partials: Vec<FrameTangent>,
}

/// Two frames of one plane moving along a curve, with velocities.
#[derive(Debug, Clone)]
pub struct PairJet {
    pub w1: Frame,
    pub w1_dot: FrameTangent,
    pub w2: Frame,
    pub w2_dot: FrameTangent,
}

/// `w(p) = base + Σ p_i L_i + Σ_{i≤j} p_i p_j Q_ij`, with `quadratic` listed
/// in the order `(0,0), (0,1), …, (1,1), …`.
pub fn polynomial_frame_family(
    pol: Polarization,
    base: CMat,
    linear: Vec<CMat>,
    quadratic: Vec<CMat>,
) -> Result<ParamFamily<FrameJet>> {
    let k = linear.len();
    if quadratic.len() != k * (k + 1) / 2 {
        return Err(shape_err(
            "polynomial_frame_family",
            format!("{} quadratic terms", k * (k + 1) / 2),
            format!("{}", quadratic.len()),
        ));
    }
    for m in std::iter::once(&base).chain(&linear).chain(&quadratic) {
        if m.shape() != (pol.dim(), pol.n_plus()) {
            return Err(shape_err(
                "polynomial_frame_family",
                format!("{}x{}", pol.dim(), pol.n_plus()),
                format!("{}x{}", m.nrows(), m.ncols()),
            ));
        }
    }
    ParamFamily::new(k, move |p: &[f64]| {
        let mut w = base.clone();
        let mut partials = linear.clone();
        let mut idx = 0;
        for i in 0..k {
            w += &linear[i] * c64(p[i], 0.0);
            for j in i..k {
                let q = &quadratic[idx];
                idx += 1;
                w += q * c64(p[i] * p[j], 0.0);
                partials[i] += q * c64(p[j], 0.0);
                partials[j] += q * c64(p[i], 0.0);
            }
        }
        let frame = Frame::new(pol, w)?;
        let partials = partials.into_iter().map(|d| FrameTangent::new(pol, d)).collect::<Result<_>>()?;
        Ok(FrameJet { frame, partials })
    })
}

/// A random quadratic `k`-parameter frame family through a random frame.
pub fn random_frame_family(
    pol: Polarization,
    k: usize,
    rng: &mut crate::numkernel::Rng,
) -> Result<ParamFamily<FrameJet>> {
    let base = random_frame(pol, 0.9, 0.4, rng)?.matrix().clone();
    let (n, m) = (pol.dim(), pol.n_plus());
    let linear = (0..k).map(|_| sample_rect(n, m, rng) * c64(0.5, 0.0)).collect();
    let quadratic = (0..k * (k + 1) / 2).map(|_| sample_rect(n, m, rng) * c64(0.25, 0.0)).collect();
    polynomial_frame_family(pol, base, linear, quadratic)
}

/// `t ↦ (w1(t), w1(t) g(t))` with `w1(t) = w0 + t X1 + t² X2` and
/// `g(t) = g0 + t G1 + t² G2`.
pub fn polynomial_pair_curve(pol: Polarization, w: [CMat; 3], g: [CMat; 3]) -> Result<ParamFamily<PairJet>> {
    ParamFamily::new(1, move |p: &[f64]| {
        let t = c64(p[0], 0.0);
        let w1 = &w[0] + &w[1] * t + &w[2] * (t * t);
        let w1_dot = &w[1] + &w[2] * (t * 2.0);
        let gt = &g[0] + &g[1] * t + &g[2] * (t * t);
        let g_dot = &g[1] + &g[2] * (t * 2.0);
        let w2 = &w1 * &gt;
        let w2_dot = &w1_dot * &gt + &w1 * g_dot;
        Ok(PairJet {
            w1: Frame::new(pol, w1)?,
            w1_dot: FrameTangent::new(pol, w1_dot)?,
            w2: Frame::new(pol, w2)?,
            w2_dot: FrameTangent::new(pol, w2_dot)?,
        })
    })
}

/// A random pair curve; `moving_gauge = false` keeps `g(t) = 1`.
pub fn random_pair_curve(
    pol: Polarization,
    moving_gauge: bool,
    rng: &mut crate::numkernel::Rng,
) -> Result<ParamFamily<PairJet>> {
    let (n, m) = (pol.dim(), pol.n_plus());
    let w0 = random_frame(pol, 0.9, 0.4, rng)?.matrix().clone();
    let w = [w0, sample_rect(n, m, rng) * c64(0.5, 0.0), sample_rect(n, m, rng) * c64(0.25, 0.0)];
    let g = if moving_gauge {
        let g0 = random_gauge(m, 0.5, rng)?.matrix().clone();
        [g0, sample_rect(m, m, rng) * c64(0.3, 0.0), sample_rect(m, m, rng) * c64(0.1, 0.0)]
    } else {
        [identity(m), CMat::zeros(m, m), CMat::zeros(m, m)]
    };
    polynomial_pair_curve(pol, w, g)
}

/// `(w, z) g = (w g, z ω(w+, g)⁻¹)`.
pub fn bundle_action(p: &BundlePoint, g: &GaugeElement) -> Result<BundlePoint> {
    let omega = omega_twist(&p.w.w_plus(), g)?;
    BundlePoint::new(p.w.act(g)?, p.z / omega)
}

/// `A(X) = -tr(pr+ X - w⁺X - w⁺ pr+ (1 - P) X)`, each term an `n+ × n+` block.
pub fn connection_a(w: &Frame, x: &FrameTangent) -> Result<C64> {
    let top = w.polarization().upper(x.matrix())?;
    Ok(-trace(&(top - theta_modified(w, x)?)))
}

/// The same 1-form written as `-tr((w+ - 1) Θ(X) + pr+ prH(X))`.
pub fn connection_a_split(w: &Frame, x: &FrameTangent) -> Result<C64> {
    let pol = w.polarization();
    let theta = theta_modified(w, x)?;
    let h = horizontal_projection(w, x)?;
    let vertical = (w.w_plus() - identity(pol.n_plus())) * theta;
    Ok(-trace(&vertical) - trace(&pol.upper(h.matrix())?))
}

/// `A(X) + α / z`.
pub fn bundle_connection(p: &BundlePoint, v: &BundleTangent) -> Result<C64> {
    Ok(connection_a(&p.w, &v.x)? + v.alpha / p.z)
}

/// Step used for scalar finite differences along curves.
pub const CURVE_STEP: f64 = 1e-4;

/// `|Â(p1, V1) - Â(p2, V2)|` where `p2 = p1 g` and `V2` is the velocity of
/// `t ↦ (w + tX, z + tα) (g + t ġ)` at `t = 0`, found by central differences.
pub fn descent_residual(p1: &BundlePoint, v1: &BundleTangent, g: &GaugeElement, gdot: &CMat, h: f64) -> Result<f64> {
    let pol = p1.w.polarization();
    if gdot.shape() != g.matrix().shape() {
        return Err(shape_err(
            "descent_residual",
            format!("{0}x{0}", pol.n_plus()),
            format!("{}x{}", gdot.nrows(), gdot.ncols()),
        ));
    }
    let along = |t: f64| -> Result<BundlePoint> {
        let w = Frame::new(pol, p1.w.matrix() + v1.x.matrix() * c64(t, 0.0))?;
        let gt = GaugeElement::new(g.matrix() + gdot * c64(t, 0.0))?;
        bundle_action(&BundlePoint::new(w, p1.z + v1.alpha * t)?, &gt)
    };
    let p2 = bundle_action(p1, g)?;
    let dw = central_richardson(|t| Ok(along(t)?.w.matrix().clone()), h)?;
    let dz = central_richardson(|t| Ok(along(t)?.z), h)?;
    check_convergence("descent pushforward", dz.disagreement, dz.value.norm())?;
    let v2 = BundleTangent::new(FrameTangent::new(pol, dw.value)?, dz.value)?;
    Ok((bundle_connection(p1, v1)? - bundle_connection(&p2, &v2)?).norm())
}

/// `-(1/16) tr((F - ε)² F (d1 d2 - d2 d1))`.
pub fn curvature_form(f: &GrassmannPoint, d1: &PointTangent, d2: &PointTangent) -> Result<C64> {
    let pol = f.polarization();
    pol.check_square(d1.matrix(), "curvature_form")?;
    pol.check_square(d2.matrix(), "curvature_form")?;
    let d = f.deviation();
    let (a, b) = (d1.matrix(), d2.matrix());
    Ok(trace(&(&d * &d * f.involution() * (a * b - b * a))) * c64(-1.0 / 16.0, 0.0))
}

/// `dF = 2 dP` along a frame tangent.
pub fn involution_velocity(w: &Frame, x: &FrameTangent) -> Result<PointTangent> {
    Ok(PointTangent::unchecked(dproj(w, x)? * c64(2.0, 0.0)))
}

/// The curvature 2-form pulled back to the frame space.
pub fn curvature_on_frames(w: &Frame, x1: &FrameTangent, x2: &FrameTangent) -> Result<C64> {
    let f = w.point()?;
    curvature_form(&f, &involution_velocity(w, x1)?, &involution_velocity(w, x2)?)
}

fn check_convergence(what: &str, disagreement: f64, value: f64) -> Result<()> {
    if !(disagreement <= INSTABILITY_RATIO * value.max(1.0)) {
        return Err(Error::NumericalInstability { what: what.to_string(), disagreement });
    }
    Ok(())
}

/// `dα(∂_1, …, ∂_k)` at the origin of a `k`-parameter family for a
/// `(k-1)`-form `α`, given as `form(jet, directions)` with `directions` the
/// indices of the coordinate fields it is evaluated on. Uses
/// `dα(∂_1..∂_k) = Σ_i (-1)^i ∂_i α(∂_1..∂̂_i..∂_k)` (coordinate fields commute).
pub fn fd_exterior_derivative_k<J, A>(form: A, family: &ParamFamily<J>, h: f64) -> Result<C64>
where
    A: Fn(&J, &[usize]) -> Result<C64>,
{
    let k = family.k();
    let mut total = C64::default();
    for i in 0..k {
        let rest: Vec<usize> = (0..k).filter(|&j| j != i).collect();
        let along = |t: f64| -> Result<C64> {
            let mut p = vec![0.0; k];
            p[i] = t;
            form(&family.eval(&p)?, &rest)
        };
        let d = central_richardson(along, h)?;
        check_convergence("exterior derivative", d.disagreement, d.value.norm())?;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        total += d.value * sign;
    }
    Ok(total)
}

/// `∂_s α(∂_t) - ∂_t α(∂_s)` at the origin of a 2-parameter frame family.
pub fn fd_exterior_derivative<A>(one_form: A, family: &ParamFamily<FrameJet>, h: f64) -> Result<C64>
where
    A: Fn(&Frame, &FrameTangent) -> Result<C64>,
{
    if family.k() != 2 {
        return Err(Error::InvalidInput(format!("a 2-parameter family is required, got {}", family.k())));
    }
    fd_exterior_derivative_k(|jet: &FrameJet, dirs: &[usize]| one_form(&jet.frame, &jet.partials[dirs[0]]), family, h)
}

/// `(dA(∂s, ∂t), Ω(∂s, ∂t))` at the origin of a 2-parameter family, where
/// `dA` is the finite-difference exterior derivative of the connection and `Ω`
/// the curvature form pulled back along the family.
pub fn connection_curvature_pair(family: &ParamFamily<FrameJet>, h: f64) -> Result<(C64, C64)> {
    let da = fd_exterior_derivative(connection_a, family, h)?;
    let jet = family.eval(&[0.0, 0.0])?;
    let omega = curvature_on_frames(&jet.frame, &jet.partials[0], &jet.partials[1])?;
    Ok((da, omega))
}

/// `|dΩ(∂1, ∂2, ∂3)|` at the origin of a 3-parameter family.
pub fn closedness_residual(family: &ParamFamily<FrameJet>, h: f64) -> Result<f64> {
    if family.k() != 3 {
        return Err(Error::InvalidInput(format!("a 3-parameter family is required, got {}", family.k())));
    }
    let form = |jet: &FrameJet, d: &[usize]| curvature_on_frames(&jet.frame, &jet.partials[d[0]], &jet.partials[d[1]]);
    Ok(fd_exterior_derivative_k(form, family, h)?.norm())
}

/// Relative defect of `dΘ + Θ∧Θ = w⁺[dP(∂s), dP(∂t)]w` for `Θ(X) = w⁺X`,
/// with `dΘ` from finite differences along a 2-parameter family.
pub fn structure_equation_residual(family: &ParamFamily<FrameJet>, h: f64) -> Result<f64> {
    if family.k() != 2 {
        return Err(Error::InvalidInput(format!("a 2-parameter family is required, got {}", family.k())));
    }
    let theta_along = |moving: usize, dir: usize| {
        central_richardson(
            |t: f64| {
                let mut p = [0.0; 2];
                p[moving] = t;
                let jet = family.eval(&p)?;
                theta_plain(&jet.frame, &jet.partials[dir])
            },
            h,
        )
    };
    let ds = theta_along(0, 1)?;
    let dt = theta_along(1, 0)?;
    for d in [&ds, &dt] {
        check_convergence("structure equation", d.disagreement, max_abs(&d.value))?;
    }
    let jet = family.eval(&[0.0, 0.0])?;
    let ts = theta_plain(&jet.frame, &jet.partials[0])?;
    let tt = theta_plain(&jet.frame, &jet.partials[1])?;
    let lhs = ds.value - dt.value + &ts * &tt - &tt * &ts;
    let rhs = curvature_lemma_form(&jet.frame, &jet.partials[0], &jet.partials[1])?;
    Ok(max_abs(&(&lhs - &rhs)) / max_abs(&lhs).max(max_abs(&rhs)).max(1e-12))
}

/// `|f⁻¹ df/dt - RHS|` at `t = 0`, with
/// `RHS = tr((w2+ - 1) Θ(w2, ẇ2)) - tr((w1+ - 1) Θ(w1, ẇ1)) + tr(pr+ prH(w2, ẇ2)) - tr(pr+ prH(w1, ẇ1))`.
pub fn dlogf_residual(pair_curve: &ParamFamily<PairJet>, h: f64) -> Result<f64> {
    if pair_curve.k() != 1 {
        return Err(Error::InvalidInput(format!("a curve is required, got {} parameters", pair_curve.k())));
    }
    let f = |t: f64| -> Result<C64> {
        let jet = pair_curve.eval(&[t])?;
        preline_f(&jet.w1, &jet.w2)
    };
    let jet = pair_curve.eval(&[0.0])?;
    gauge_between(&jet.w1, &jet.w2)?;
    let d = central_richardson(f, h)?;
    check_convergence("log-derivative of f", d.disagreement, d.value.norm())?;
    let lhs = d.value / f(0.0)?;

    let pol = jet.w1.polarization();
    let one = identity(pol.n_plus());
    let part = |w: &Frame, x: &FrameTangent| -> Result<C64> {
        let theta = theta_modified(w, x)?;
        let hor = horizontal_projection(w, x)?;
        Ok(trace(&((w.w_plus() - &one) * theta)) + trace(&pol.upper(hor.matrix())?))
    };
    let rhs = part(&jet.w2, &jet.w2_dot)? - part(&jet.w1, &jet.w1_dot)?;
    Ok((lhs - rhs).norm())
}
