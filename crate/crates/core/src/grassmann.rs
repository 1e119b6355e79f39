//! Points of the L4 Grassmannian, stored as self-adjoint involutions `F`
//! with `F - ε` small, together with their tangent vectors.
//!
//! Projections `P = (1 + F)/2` and frames are derived views. Only the
//! virtual-dimension-zero component is admitted.

use serde::{Deserialize, Serialize};

use crate::cocycles::LieElement;
use crate::error::{Error, Result};
use crate::numkernel::{
    c64, commutator, identity, matrix_exp, max_abs, pseudo_inverse, sample_random, schatten_norm, trace, CMat,
    MatrixJson, Rng, SampleKind,
};
use crate::polarized::{Blocks, Polarization};

/// Tolerance on `F = F*`, `F² = 1` and `P² = P`.
pub const POINT_TOL: f64 = 1e-10;
/// A trace that should be an integer may miss it by at most this much.
pub const INDEX_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannPoint {
    pol: Polarization,
    f: CMat,
}

/// Norms of the block deviations `F11 - 1`, `F22 + 1` (Hilbert-Schmidt) and `F12` (L4).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockDiagnostics {
    pub f11_minus_one_l2: f64,
    pub f22_plus_one_l2: f64,
    pub f12_l4: f64,
}

/// `tr(F - ε)/2`, the index of `pr+ : W → H+`, rounded to the nearest integer.
pub fn virtual_dimension(pol: &Polarization, f: &CMat) -> Result<i64> {
    pol.check_square(f, "virtual_dimension")?;
    let half = 0.5 * (trace(f) - trace(&pol.epsilon()));
    let nearest = half.re.round();
    let miss = (half - c64(nearest, 0.0)).norm();
    if miss > INDEX_GUARD {
        return Err(Error::InvariantViolation { what: "tr(F - ε)/2 is not an integer".into(), residual: miss });
    }
    Ok(nearest as i64)
}

impl GrassmannPoint {
    /// Validates `F = F*`, `F² = 1` and virtual dimension zero.
    pub fn new(pol: Polarization, f: CMat) -> Result<Self> {
        pol.check_square(&f, "GrassmannPoint::new")?;
        crate::numkernel::check_finite(&f, "involution")?;
        let n = pol.dim();
        let herm = max_abs(&(&f - f.adjoint()));
        if herm > POINT_TOL {
            return Err(Error::InvariantViolation { what: "F is not self-adjoint".into(), residual: herm });
        }
        let inv = max_abs(&(&f * &f - identity(n)));
        if inv > POINT_TOL {
            return Err(Error::InvariantViolation { what: "F² ≠ 1".into(), residual: inv });
        }
        match virtual_dimension(&pol, &f)? {
            0 => Ok(GrassmannPoint { pol, f }),
            k => Err(Error::VirtualDimension(k)),
        }
    }

    /// The base point `F = ε` (the plane `H+`).
    pub fn base(pol: Polarization) -> Self {
        GrassmannPoint { f: pol.epsilon(), pol }
    }

    /// `F = 2P - 1` for an orthogonal projection `P`.
    pub fn from_projection(pol: Polarization, p: &CMat) -> Result<Self> {
        pol.check_square(p, "involution_from_projection")?;
        let herm = max_abs(&(p - p.adjoint()));
        let idem = max_abs(&(p * p - p));
        let residual = herm.max(idem);
        if residual > POINT_TOL {
            return Err(Error::InvariantViolation { what: "not an orthogonal projection".into(), residual });
        }
        let f = p * c64(2.0, 0.0) - identity(pol.dim());
        Self::new(pol, f)
    }

    /// The plane spanned by the columns of an injective `w`:
    /// `P_W = w (w*w)^{-1} w*`, `F = 2 P_W - 1`.
    pub fn from_frame_matrix(pol: Polarization, w: &CMat) -> Result<Self> {
        let p = w * pseudo_inverse(w)?;
        // symmetrize away rounding so the point validates at full precision
        let p = (&p + p.adjoint()) * c64(0.5, 0.0);
        Self::from_projection(pol, &p)
    }

    pub fn polarization(&self) -> Polarization {
        self.pol
    }

    pub fn involution(&self) -> &CMat {
        &self.f
    }

    pub fn projection(&self) -> CMat {
        (&self.f + identity(self.pol.dim())) * c64(0.5, 0.0)
    }

    /// `F - ε`.
    pub fn deviation(&self) -> CMat {
        &self.f - self.pol.epsilon()
    }

    pub fn blocks(&self) -> Blocks {
        self.pol.split_blocks(&self.f).expect("shape checked at construction")
    }

    pub fn block_diagnostics(&self) -> BlockDiagnostics {
        let b = self.blocks();
        let one = identity(self.pol.n_plus());
        let one_m = identity(self.pol.n_minus());
        BlockDiagnostics {
            f11_minus_one_l2: schatten_norm(&(&b.a - one), 2.0).unwrap_or(f64::NAN),
            f22_plus_one_l2: schatten_norm(&(&b.d + one_m), 2.0).unwrap_or(f64::NAN),
            f12_l4: schatten_norm(&b.b, 4.0).unwrap_or(f64::NAN),
        }
    }

    pub fn to_json(&self) -> GrassmannPointJson {
        GrassmannPointJson { kind: "grassmann_point".into(), pol: self.pol, f: MatrixJson::from(&self.f) }
    }

    pub fn from_json(j: &GrassmannPointJson) -> Result<Self> {
        if j.kind != "grassmann_point" {
            return Err(Error::InvalidInput(format!("expected type grassmann_point, got {}", j.kind)));
        }
        Self::new(j.pol, CMat::try_from(&j.f)?)
    }
}

/// `{"type": "grassmann_point", "pol": {...}, "F": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrassmannPointJson {
    #[serde(rename = "type")]
    pub kind: String,
    pub pol: Polarization,
    #[serde(rename = "F")]
    pub f: MatrixJson,
}

/// A complexified tangent vector `dF` at a point; it anticommutes with `F`
/// but need not be self-adjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct PointTangent {
    df: CMat,
}

impl PointTangent {
    pub fn new(point: &GrassmannPoint, df: CMat) -> Result<Self> {
        point.pol.check_square(&df, "PointTangent::new")?;
        let f = point.involution();
        let anti = max_abs(&(&df * f + f * &df));
        if anti > POINT_TOL * max_abs(&df).max(1.0) {
            return Err(Error::InvariantViolation { what: "dF does not anticommute with F".into(), residual: anti });
        }
        Ok(PointTangent { df })
    }

    /// Wraps `df` without the anticommutation check (used for finite-difference
    /// tangents, which only anticommute up to truncation error).
    pub fn unchecked(df: CMat) -> Self {
        PointTangent { df }
    }

    pub fn matrix(&self) -> &CMat {
        &self.df
    }

    /// Whether `dF = dF*`, i.e. a real tangent vector.
    pub fn is_real(&self) -> bool {
        max_abs(&(&self.df - self.df.adjoint())) <= POINT_TOL * max_abs(&self.df).max(1.0)
    }
}

/// The fundamental vector field `X̂_F = [F, X]`.
pub fn fundamental_field(point: &GrassmannPoint, x: &LieElement) -> Result<PointTangent> {
    point.pol.check_square(x.matrix(), "fundamental_field")?;
    Ok(PointTangent { df: commutator(point.involution(), x.matrix()) })
}

/// `F = u ε u*` with `u = exp(i · spread · H)` and `H` a random Hermitian
/// matrix of unit operator norm.
pub fn random_point(pol: Polarization, spread: f64, rng: &mut Rng) -> Result<GrassmannPoint> {
    if !(spread > 0.0) {
        return Err(Error::InvalidInput(format!("spread must be positive, got {spread}")));
    }
    let h = crate::numkernel::with_operator_norm(&sample_random(SampleKind::Hermitian, pol.dim(), rng), 1.0);
    let u = matrix_exp(&(h * c64(0.0, spread)))?;
    let f = &u * pol.epsilon() * u.adjoint();
    let f = (&f + f.adjoint()) * c64(0.5, 0.0);
    GrassmannPoint::new(pol, f)
}

/// Residuals of the algebraic identities satisfied by any point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    /// `(F-ε)² = 2 - εF - Fε`
    pub deviation_square: f64,
    /// `εFε = 2ε - F - (F-ε)²ε`
    pub conjugated: f64,
    /// `F11 - 1 = -¼ (F-ε)²(1+ε)` on the `(1,1)` block
    pub upper_block: f64,
    /// `F22 + 1 = ¼ (F-ε)²(1-ε)` on the `(2,2)` block
    pub lower_block: f64,
}

impl IdentityReport {
    pub fn max(&self) -> f64 {
        self.deviation_square.max(self.conjugated).max(self.upper_block).max(self.lower_block)
    }
}

pub fn appendix_identity_suite(point: &GrassmannPoint) -> IdentityReport {
    let pol = point.polarization();
    let n = pol.dim();
    let f = point.involution();
    let e = pol.epsilon();
    let one = identity(n);
    let d = point.deviation();
    let d2 = &d * &d;
    let two = c64(2.0, 0.0);
    let quarter = c64(0.25, 0.0);

    let deviation_square = max_abs(&(&d2 - (&one * two - &e * f - f * &e)));
    let conjugated = max_abs(&(&e * f * &e - (&e * two - f - &d2 * &e)));
    let upper = pol.split_blocks(&(&d2 * (&one + &e) * (-quarter))).expect("square");
    let lower = pol.split_blocks(&(&d2 * (&one - &e) * quarter)).expect("square");
    let b = point.blocks();
    let upper_block = max_abs(&(&b.a - identity(pol.n_plus()) - upper.a));
    let lower_block = max_abs(&(&b.d + identity(pol.n_minus()) - lower.d));
    IdentityReport { deviation_square, conjugated, upper_block, lower_block }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{sample_rect, zeros, Rng};
    use proptest::prelude::*;

    fn swap_point() -> GrassmannPoint {
        let pol = Polarization::symmetric(1).unwrap();
        let f = CMat::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)]);
        GrassmannPoint::new(pol, f).unwrap()
    }

    fn standard_frame(pol: Polarization, scale: f64) -> CMat {
        let mut w = zeros(pol.dim(), pol.n_plus());
        for i in 0..pol.n_plus() {
            w[(i, i)] = c64(scale, 0.0);
        }
        w
    }

    #[test]
    fn projection_of_h_plus_is_epsilon() {
        let pol = Polarization::new(3, 2).unwrap();
        let p = GrassmannPoint::from_projection(pol, &pol.pr_plus()).unwrap();
        assert_eq!(p.involution(), &pol.epsilon());
        assert_eq!(p.projection(), pol.pr_plus());
    }

    #[test]
    fn full_projection_has_wrong_virtual_dimension() {
        let pol = Polarization::new(3, 2).unwrap();
        match GrassmannPoint::from_projection(pol, &identity(5)) {
            Err(Error::VirtualDimension(k)) => assert_eq!(k, 2),
            other => panic!("expected virtual dimension error, got {other:?}"),
        }
        assert_eq!(virtual_dimension(&pol, &identity(5)).unwrap(), 2);
    }

    #[test]
    fn rejects_non_projection() {
        let pol = Polarization::symmetric(2).unwrap();
        let p = pol.pr_plus() * c64(0.9, 0.0);
        assert!(matches!(GrassmannPoint::from_projection(pol, &p), Err(Error::InvariantViolation { .. })));
    }

    #[test]
    fn conjugated_projection_is_involution() {
        let pol = Polarization::symmetric(4).unwrap();
        let mut rng = Rng::new(21, 0);
        let u = sample_random(SampleKind::Unitary, 8, &mut rng);
        let p = &u * pol.pr_plus() * u.adjoint();
        let p = (&p + p.adjoint()) * c64(0.5, 0.0);
        let pt = GrassmannPoint::from_projection(pol, &p).unwrap();
        let f = pt.involution();
        assert!(max_abs(&(f * f - identity(8))) <= 1e-12);
    }

    #[test]
    fn frames_and_scale_invariance() {
        let pol = Polarization::new(2, 3).unwrap();
        let a = GrassmannPoint::from_frame_matrix(pol, &standard_frame(pol, 1.0)).unwrap();
        let b = GrassmannPoint::from_frame_matrix(pol, &standard_frame(pol, 2.0)).unwrap();
        assert!(max_abs(&(a.involution() - pol.epsilon())) <= 1e-15);
        assert!(max_abs(&(b.involution() - pol.epsilon())) <= 1e-15);
    }

    #[test]
    fn frame_projection_fixes_frame() {
        let pol = Polarization::symmetric(4).unwrap();
        let w = sample_rect(8, 4, &mut Rng::new(22, 0));
        let pt = GrassmannPoint::from_frame_matrix(pol, &w).unwrap();
        assert!(max_abs(&(pt.projection() * &w - &w)) <= 1e-10);
    }

    #[test]
    fn rank_deficient_frame_is_singular() {
        let pol = Polarization::symmetric(2).unwrap();
        let mut w = standard_frame(pol, 1.0);
        w[(1, 1)] = c64(0.0, 0.0);
        assert!(matches!(GrassmannPoint::from_frame_matrix(pol, &w), Err(Error::Singular { .. })));
    }

    #[test]
    fn fundamental_field_examples() {
        let pol = Polarization::symmetric(2).unwrap();
        let mut rng = Rng::new(23, 0);
        let pt = random_point(pol, 0.7, &mut rng).unwrap();
        let commuting = LieElement::new(pt.involution().clone()).unwrap();
        assert!(max_abs(fundamental_field(&pt, &commuting).unwrap().matrix()) <= 1e-14);

        let base = GrassmannPoint::base(pol);
        let x = sample_random(SampleKind::General, 4, &mut rng);
        let mut blocks = pol.split_blocks(&x).unwrap();
        let (b, c) = (blocks.b.clone(), blocks.c.clone());
        let v = fundamental_field(&base, &LieElement::new(x).unwrap()).unwrap();
        let expect = Blocks { a: zeros(2, 2), b: &b * c64(2.0, 0.0), c: &c * c64(-2.0, 0.0), d: zeros(2, 2) };
        assert!(max_abs(&(v.matrix() - expect.assemble())) <= 1e-14);

        blocks.b.fill(c64(0.0, 0.0));
        blocks.c.fill(c64(0.0, 0.0));
        let diag = fundamental_field(&base, &LieElement::new(blocks.assemble()).unwrap()).unwrap();
        assert_eq!(max_abs(diag.matrix()), 0.0);
    }

    #[test]
    fn random_points_small_spread_and_index() {
        let pol = Polarization::symmetric(3).unwrap();
        let tiny = random_point(pol, 1e-9, &mut Rng::new(24, 0)).unwrap();
        assert!(max_abs(&tiny.deviation()) < 1e-8);
        for seed in 0..100 {
            let pt = random_point(pol, 1.0, &mut Rng::new(seed, 1)).unwrap();
            let half = 0.5 * (trace(pt.involution()) - trace(&pol.epsilon()));
            assert!(half.norm() <= 1e-8);
        }
        assert!(random_point(pol, 0.0, &mut Rng::new(0, 0)).is_err());
    }

    #[test]
    fn identity_suite_examples() {
        let pol = Polarization::symmetric(3).unwrap();
        assert_eq!(appendix_identity_suite(&GrassmannPoint::base(pol)).max(), 0.0);
        let swap = swap_point();
        let d = swap.deviation();
        assert_eq!(&d * &d, identity(2) * c64(2.0, 0.0));
        assert_eq!(appendix_identity_suite(&swap).max(), 0.0);
        let pt = random_point(pol, 1.3, &mut Rng::new(25, 0)).unwrap();
        assert!(appendix_identity_suite(&pt).max() <= 1e-10);
    }

    #[test]
    fn block_diagnostics_are_finite() {
        let pol = Polarization::symmetric(3).unwrap();
        let pt = random_point(pol, 0.8, &mut Rng::new(26, 0)).unwrap();
        let d = pt.block_diagnostics();
        assert!(d.f11_minus_one_l2.is_finite() && d.f22_plus_one_l2.is_finite() && d.f12_l4.is_finite());
        assert!(d.f12_l4 > 0.0);
        let base = GrassmannPoint::base(pol).block_diagnostics();
        assert_eq!((base.f11_minus_one_l2, base.f22_plus_one_l2, base.f12_l4), (0.0, 0.0, 0.0));
    }

    #[test]
    fn json_wrapper_round_trip() {
        let pol = Polarization::symmetric(2).unwrap();
        let pt = random_point(pol, 0.5, &mut Rng::new(27, 0)).unwrap();
        let text = serde_json::to_string(&pt.to_json()).unwrap();
        assert!(text.contains(r#""type":"grassmann_point""#));
        let back: GrassmannPointJson = serde_json::from_str(&text).unwrap();
        assert_eq!(GrassmannPoint::from_json(&back).unwrap(), pt);
    }

    #[test]
    fn tangent_checks() {
        let pol = Polarization::symmetric(2).unwrap();
        let pt = random_point(pol, 0.5, &mut Rng::new(28, 0)).unwrap();
        assert!(PointTangent::new(&pt, identity(4)).is_err());
        let x = sample_random(SampleKind::Hermitian, 4, &mut Rng::new(28, 1));
        // i[F, X] is self-adjoint for Hermitian X
        let v = fundamental_field(&pt, &LieElement::new(x * c64(0.0, 1.0)).unwrap()).unwrap();
        assert!(v.is_real());
        let g = fundamental_field(
            &pt,
            &LieElement::new(sample_random(SampleKind::General, 4, &mut Rng::new(28, 2))).unwrap(),
        )
        .unwrap();
        assert!(!g.is_real());
    }

    proptest! {
        #[test]
        fn fundamental_field_anticommutes(seed in any::<u64>(), spread in 0.1f64..2.0) {
            let pol = Polarization::symmetric(3).unwrap();
            let mut rng = Rng::new(seed, 0);
            let pt = random_point(pol, spread, &mut rng).unwrap();
            let x = LieElement::new(sample_random(SampleKind::General, 6, &mut rng)).unwrap();
            let v = fundamental_field(&pt, &x).unwrap();
            prop_assert!(PointTangent::new(&pt, v.matrix().clone()).is_ok());
        }

        #[test]
        fn frame_point_is_gauge_invariant(seed in any::<u64>()) {
            let pol = Polarization::symmetric(3).unwrap();
            let mut rng = Rng::new(seed, 0);
            let w = sample_rect(6, 3, &mut rng);
            let g = identity(3) + sample_rect(3, 3, &mut rng) * c64(0.3, 0.0);
            let a = GrassmannPoint::from_frame_matrix(pol, &w).unwrap();
            let b = GrassmannPoint::from_frame_matrix(pol, &(&w * g)).unwrap();
            prop_assert!(max_abs(&(a.involution() - b.involution())) <= 1e-9);
        }
    }
}
