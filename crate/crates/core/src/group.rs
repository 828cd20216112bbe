//! Exact algebra of the affine Poincaré group: plane translations combined
//! with dilations and hyperbolic rotations.
//!
//! An element is (b, a, phi) acting on the plane by x ↦ a Λ_phi x + b, where
//! Λ_phi is the SO(1,1) matrix [[cosh phi, sinh phi], [sinh phi, cosh phi]].
//! The group is non-unimodular: left Haar density 1/a³, right 1/a, modular
//! function 1/a². Everything here is closed-form; no grids are involved.

use crate::error::{PncError, Result};

pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

/// Relative tolerance used to flag points on the light cone |x1| = |x2|.
pub const LIGHT_CONE_TOL: f64 = 1e-12;

/// Minkowski inner product x1*y1 - x2*y2.
#[inline]
pub fn minkowski(x: Vec2, y: Vec2) -> f64 {
    x[0] * y[0] - x[1] * y[1]
}

/// The hyperbolic rotation matrix Λ_phi, determinant one.
#[inline]
pub fn hyperbolic_rotation(phi: f64) -> Mat2 {
    let (c, s) = (phi.cosh(), phi.sinh());
    [[c, s], [s, c]]
}

#[inline]
pub fn mat_vec(m: Mat2, x: Vec2) -> Vec2 {
    [
        m[0][0] * x[0] + m[0][1] * x[1],
        m[1][0] * x[0] + m[1][1] * x[1],
    ]
}

/// a Λ_{-phi} x — the plane action appearing in the representations.
#[inline]
pub fn act(a: f64, phi: f64, x: Vec2) -> Vec2 {
    let m = hyperbolic_rotation(-phi);
    let y = mat_vec(m, x);
    [a * y[0], a * y[1]]
}

/// Which Haar measure a density refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HaarSide {
    Left,
    Right,
}

/// A group element (b, a, phi): translation, dilation (a > 0) and
/// hyperbolic angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupElement {
    pub b: Vec2,
    pub a: f64,
    pub phi: f64,
}

impl GroupElement {
    pub fn new(b: Vec2, a: f64, phi: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(PncError::InvalidElement(format!(
                "dilation must be positive and finite, got {a}"
            )));
        }
        if !b[0].is_finite() || !b[1].is_finite() || !phi.is_finite() {
            return Err(PncError::InvalidElement(format!(
                "non-finite field in ({b:?}, {a}, {phi})"
            )));
        }
        Ok(GroupElement { b, a, phi })
    }

    pub fn identity() -> Self {
        GroupElement {
            b: [0.0, 0.0],
            a: 1.0,
            phi: 0.0,
        }
    }

    /// Group law: (b,a,phi) * (b',a',phi') = (b + a Λ_phi b', a a', phi + phi').
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        let m = hyperbolic_rotation(self.phi);
        let rb = mat_vec(m, other.b);
        GroupElement {
            b: [self.b[0] + self.a * rb[0], self.b[1] + self.a * rb[1]],
            a: self.a * other.a,
            phi: self.phi + other.phi,
        }
    }

    /// Inverse: ((-1/a) Λ_{-phi} b, 1/a, -phi).
    pub fn inverse(&self) -> GroupElement {
        let m = hyperbolic_rotation(-self.phi);
        let rb = mat_vec(m, self.b);
        GroupElement {
            b: [-rb[0] / self.a, -rb[1] / self.a],
            a: 1.0 / self.a,
            phi: -self.phi,
        }
    }

    /// Modular function Δ(g) = 1/a².
    #[inline]
    pub fn modular(&self) -> f64 {
        1.0 / (self.a * self.a)
    }

    /// Haar density at g: left 1/a³, right 1/a.
    #[inline]
    pub fn haar_density(&self, side: HaarSide) -> f64 {
        match side {
            HaarSide::Left => 1.0 / (self.a * self.a * self.a),
            HaarSide::Right => 1.0 / self.a,
        }
    }

    /// The unique h with h * h = g.
    ///
    /// Solving (b',a',phi')*(b',a',phi') = (b,a,phi) gives a' = sqrt(a),
    /// phi' = phi/2 and (I + sqrt(a) Λ_{phi/2}) b' = b, whose closed form is
    /// b' = (b + sqrt(a) Λ_{-phi/2} b) / (1 + a + 2 sqrt(a) cosh(phi/2)).
    pub fn sqrt_element(&self) -> GroupElement {
        let ra = self.a.sqrt();
        let half = self.phi / 2.0;
        let denom = 1.0 + self.a + 2.0 * ra * half.cosh();
        let rb = mat_vec(hyperbolic_rotation(-half), self.b);
        GroupElement {
            b: [
                (self.b[0] + ra * rb[0]) / denom,
                (self.b[1] + ra * rb[1]) / denom,
            ],
            a: ra,
            phi: half,
        }
    }
}

/// Which of the four open cones a plane point lies in.
///
/// The labels are the four connected orbits of the dilation/hyperbolic-
/// rotation action: sector picks the sign of the Minkowski form, sign picks
/// the half (first coordinate for spacelike, second for timelike).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ConeLabel {
    pub sector: Sector,
    pub sign: Sign,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sector {
    Spacelike,
    Timelike,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl ConeLabel {
    pub const SPACELIKE_PLUS: ConeLabel = ConeLabel {
        sector: Sector::Spacelike,
        sign: Sign::Plus,
    };
    pub const SPACELIKE_MINUS: ConeLabel = ConeLabel {
        sector: Sector::Spacelike,
        sign: Sign::Minus,
    };
    pub const TIMELIKE_PLUS: ConeLabel = ConeLabel {
        sector: Sector::Timelike,
        sign: Sign::Plus,
    };
    pub const TIMELIKE_MINUS: ConeLabel = ConeLabel {
        sector: Sector::Timelike,
        sign: Sign::Minus,
    };

    pub const ALL: [ConeLabel; 4] = [
        ConeLabel::SPACELIKE_PLUS,
        ConeLabel::SPACELIKE_MINUS,
        ConeLabel::TIMELIKE_PLUS,
        ConeLabel::TIMELIKE_MINUS,
    ];

    /// Stable index 0..4 (order of [`ConeLabel::ALL`]).
    pub fn index(&self) -> usize {
        match (self.sector, self.sign) {
            (Sector::Spacelike, Sign::Plus) => 0,
            (Sector::Spacelike, Sign::Minus) => 1,
            (Sector::Timelike, Sign::Plus) => 2,
            (Sector::Timelike, Sign::Minus) => 3,
        }
    }

    pub fn from_index(i: usize) -> ConeLabel {
        ConeLabel::ALL[i]
    }

    pub fn short_name(&self) -> &'static str {
        match (self.sector, self.sign) {
            (Sector::Spacelike, Sign::Plus) => "space+",
            (Sector::Spacelike, Sign::Minus) => "space-",
            (Sector::Timelike, Sign::Plus) => "time+",
            (Sector::Timelike, Sign::Minus) => "time-",
        }
    }
}

/// Classify a plane point into one of the four cones.
///
/// Points with ||x1| - |x2|| <= tol * |x| (the light cone) are rejected as
/// boundary; the chart coordinates blow up there.
pub fn classify_with_tol(x: Vec2, tol: f64) -> Result<ConeLabel> {
    let scale = x[0].hypot(x[1]);
    if (x[0].abs() - x[1].abs()).abs() <= tol * scale || scale == 0.0 {
        return Err(PncError::BoundaryPoint(x[0], x[1]));
    }
    let label = if x[0].abs() > x[1].abs() {
        if x[0] > 0.0 {
            ConeLabel::SPACELIKE_PLUS
        } else {
            ConeLabel::SPACELIKE_MINUS
        }
    } else if x[1] > 0.0 {
        ConeLabel::TIMELIKE_PLUS
    } else {
        ConeLabel::TIMELIKE_MINUS
    };
    Ok(label)
}

pub fn classify(x: Vec2) -> Result<ConeLabel> {
    classify_with_tol(x, LIGHT_CONE_TOL)
}

/// Hyperbolic chart coordinates of a cone point: radius s > 0 and rapidity t.
///
/// Spacelike/Plus embeds as x = s (cosh t, sinh t); the other cones apply
/// the overall sign and/or swap the components. |<x;x>| = s² in every cone.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperbolicCoords {
    pub s: f64,
    pub t: f64,
    pub label: ConeLabel,
}

pub fn to_hyperbolic(x: Vec2) -> Result<HyperbolicCoords> {
    let label = classify(x)?;
    let q = minkowski(x, x);
    let s = q.abs().sqrt();
    let t = match (label.sector, label.sign) {
        (Sector::Spacelike, Sign::Plus) => (x[1] / s).asinh(),
        (Sector::Spacelike, Sign::Minus) => (-x[1] / s).asinh(),
        (Sector::Timelike, Sign::Plus) => (x[0] / s).asinh(),
        (Sector::Timelike, Sign::Minus) => (-x[0] / s).asinh(),
    };
    Ok(HyperbolicCoords { s, t, label })
}

pub fn from_hyperbolic(h: &HyperbolicCoords) -> Vec2 {
    let (c, sn) = (h.t.cosh(), h.t.sinh());
    let (u, v) = match h.label.sector {
        Sector::Spacelike => (c, sn),
        Sector::Timelike => (sn, c),
    };
    let sign = match h.label.sign {
        Sign::Plus => 1.0,
        Sign::Minus => -1.0,
    };
    [sign * h.s * u, sign * h.s * v]
}

/// Parameters (a, phi) recovered from y = a Λ_{-phi} x, together with the
/// Minkowski-form expressions for cross-checking: a also equals
/// (<y;y>/<x;x>)^{1/2} and cosh phi equals (<x;y>/<x;x>)(<x;x>/<y;y>)^{1/2}.
#[derive(Clone, Copy, Debug)]
pub struct RecoveredParams {
    pub a: f64,
    pub phi: f64,
    pub a_minkowski: f64,
    pub cosh_phi_minkowski: f64,
}

/// Recover the unique (a, phi) with y = act(a, phi, x).
///
/// Computed through the chart (a = s_y/s_x, phi = t_x - t_y), which keeps
/// the sign of phi; the Minkowski-form expressions only determine |phi|.
pub fn recover_params(x: Vec2, y: Vec2) -> Result<RecoveredParams> {
    let hx = to_hyperbolic(x)?;
    let hy = to_hyperbolic(y)?;
    if hx.label != hy.label {
        return Err(PncError::ConeMismatch(hx.label, hy.label));
    }
    let qx = minkowski(x, x);
    let qy = minkowski(y, y);
    let qxy = minkowski(x, y);
    Ok(RecoveredParams {
        a: hy.s / hx.s,
        phi: hx.t - hy.t,
        a_minkowski: (qy / qx).sqrt(),
        cosh_phi_minkowski: qxy / qx * (qx / qy).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Oracle for the group law: the 3x3 homogeneous matrix
    /// [[a Λ_phi, b], [0, 1]] multiplies like the group composes.
    fn to_matrix3(g: &GroupElement) -> [[f64; 3]; 3] {
        let m = hyperbolic_rotation(g.phi);
        [
            [g.a * m[0][0], g.a * m[0][1], g.b[0]],
            [g.a * m[1][0], g.a * m[1][1], g.b[1]],
            [0.0, 0.0, 1.0],
        ]
    }

    fn mat3_mul(a: [[f64; 3]; 3], b: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
        let mut c = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        c
    }

    fn elem(b0: f64, b1: f64, a: f64, phi: f64) -> GroupElement {
        GroupElement::new([b0, b1], a, phi).unwrap()
    }

    fn close(x: f64, y: f64, tol: f64) -> bool {
        (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs()))
    }

    #[test]
    fn compose_with_identity() {
        let g = elem(1.0, -2.0, 3.0, 0.7);
        let e = GroupElement::identity();
        assert_eq!(g.compose(&e), g);
        assert_eq!(e.compose(&g), g);
    }

    #[test]
    fn compose_without_rotation_is_affine() {
        let g = elem(1.0, 0.0, 2.0, 0.0);
        let h = elem(0.0, 1.0, 3.0, 0.0);
        let gh = g.compose(&h);
        assert_eq!(gh.b, [1.0, 2.0]);
        assert_eq!(gh.a, 6.0);
        assert_eq!(gh.phi, 0.0);
    }

    #[test]
    fn compose_matches_matrix_oracle_on_spec_case() {
        let g = elem(1.0, 0.0, 2.0, 0.5);
        let h = elem(0.0, 1.0, 1.0, 0.0);
        let gh = g.compose(&h);
        // Frozen from the homogeneous 3x3 product.
        assert!(close(gh.b[0], 2.0421906109874948, 1e-12), "{}", gh.b[0]);
        assert!(close(gh.b[1], 2.2552519304127614, 1e-12), "{}", gh.b[1]);
        assert_eq!(gh.a, 2.0);
        assert_eq!(gh.phi, 0.5);

        let m = mat3_mul(to_matrix3(&g), to_matrix3(&h));
        let mc = to_matrix3(&gh);
        for i in 0..3 {
            for j in 0..3 {
                assert!(close(m[i][j], mc[i][j], 1e-13), "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn inverse_trivial_cases() {
        let e = GroupElement::identity();
        assert_eq!(e.inverse(), e);
        let g = elem(1.0, 0.0, 2.0, 0.0);
        let gi = g.inverse();
        assert_eq!(gi.b, [-0.5, 0.0]);
        assert_eq!(gi.a, 0.5);
        assert_eq!(gi.phi, 0.0);
    }

    #[test]
    fn modular_values() {
        assert_eq!(elem(0.3, 0.1, 1.0, 0.4).modular(), 1.0);
        assert_eq!(elem(0.3, 0.1, 2.0, 0.4).modular(), 0.25);
    }

    #[test]
    fn haar_densities() {
        let g = elem(0.0, 0.0, 2.0, 1.0);
        assert_eq!(g.haar_density(HaarSide::Left), 0.125);
        assert_eq!(g.haar_density(HaarSide::Right), 0.5);
        let e = elem(1.0, 1.0, 1.0, 0.3);
        assert_eq!(e.haar_density(HaarSide::Left), 1.0);
    }

    #[test]
    fn rotation_at_zero_is_identity() {
        let m = hyperbolic_rotation(0.0);
        assert_eq!(m, [[1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn minkowski_values() {
        assert_eq!(minkowski([1.0, 0.0], [1.0, 0.0]), 1.0);
        assert_eq!(minkowski([1.0, 2.0], [3.0, 4.0]), -5.0);
        assert_eq!(minkowski([1.0, 1.0], [1.0, 1.0]), 0.0);
    }

    #[test]
    fn classify_spec_points() {
        assert_eq!(classify([2.0, 1.0]).unwrap(), ConeLabel::SPACELIKE_PLUS);
        assert_eq!(classify([1.0, 2.0]).unwrap(), ConeLabel::TIMELIKE_PLUS);
        assert_eq!(classify([-3.0, 1.0]).unwrap(), ConeLabel::SPACELIKE_MINUS);
        assert_eq!(classify([0.5, -2.0]).unwrap(), ConeLabel::TIMELIKE_MINUS);
        assert!(matches!(
            classify([1.0, 1.0]),
            Err(PncError::BoundaryPoint(_, _))
        ));
    }

    #[test]
    fn hyperbolic_chart_spec_points() {
        let h = to_hyperbolic([1.0f64.cosh(), 1.0f64.sinh()]).unwrap();
        assert!(close(h.s, 1.0, 1e-12) && close(h.t, 1.0, 1e-12));
        assert_eq!(h.label, ConeLabel::SPACELIKE_PLUS);

        let h = to_hyperbolic([0.0, 3.0]).unwrap();
        assert!(close(h.s, 3.0, 1e-12) && h.t.abs() < 1e-12);
        assert_eq!(h.label, ConeLabel::TIMELIKE_PLUS);
    }

    #[test]
    fn act_spec_case() {
        let y = act(2.0, 0.5, [1.0, 0.0]);
        assert!(close(y[0], 2.0 * 0.5f64.cosh(), 1e-12));
        assert!(close(y[1], -2.0 * 0.5f64.sinh(), 1e-12));
        assert_eq!(act(1.0, 0.0, [0.3, -0.7]), [0.3, -0.7]);
    }

    #[test]
    fn recover_params_round_trip() {
        let x = [1.0, 0.0];
        let y = act(2.0, 0.5, x);
        let r = recover_params(x, y).unwrap();
        assert!(close(r.a, 2.0, 1e-12) && close(r.phi, 0.5, 1e-12));
        let same = recover_params(x, x).unwrap();
        assert!(close(same.a, 1.0, 1e-12) && same.phi.abs() < 1e-12);
    }

    #[test]
    fn recover_params_rejects_cone_mismatch() {
        assert!(matches!(
            recover_params([2.0, 0.0], [0.0, 2.0]),
            Err(PncError::ConeMismatch(_, _))
        ));
    }

    #[test]
    fn sqrt_element_trivial_cases() {
        let e = GroupElement::identity();
        assert_eq!(e.sqrt_element(), e);
        let g = elem(0.0, 0.0, 4.0, 0.0);
        let h = g.sqrt_element();
        assert_eq!(h.a, 2.0);
        assert_eq!(h.phi, 0.0);
        assert_eq!(h.b, [0.0, 0.0]);
    }

    #[test]
    fn construction_rejects_bad_dilation() {
        assert!(GroupElement::new([0.0, 0.0], 0.0, 0.0).is_err());
        assert!(GroupElement::new([0.0, 0.0], -1.0, 0.0).is_err());
        assert!(GroupElement::new([0.0, f64::NAN], 1.0, 0.0).is_err());
    }

    fn arb_elem() -> impl Strategy<Value = GroupElement> {
        (
            -5.0..5.0f64,
            -5.0..5.0f64,
            0.2..5.0f64,
            -2.0..2.0f64,
        )
            .prop_map(|(b0, b1, a, phi)| elem(b0, b1, a, phi))
    }

    fn arb_cone_point() -> impl Strategy<Value = Vec2> {
        // Build points through the chart so they are safely off the light cone.
        (0..4usize, 0.2..4.0f64, -2.0..2.0f64).prop_map(|(l, s, t)| {
            from_hyperbolic(&HyperbolicCoords {
                s,
                t,
                label: ConeLabel::from_index(l),
            })
        })
    }

    proptest! {
        #[test]
        fn compose_matches_matrix_oracle(g in arb_elem(), h in arb_elem()) {
            let gh = g.compose(&h);
            let m = mat3_mul(to_matrix3(&g), to_matrix3(&h));
            let mc = to_matrix3(&gh);
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert!(close(m[i][j], mc[i][j], 1e-12));
                }
            }
        }

        #[test]
        fn associativity(g in arb_elem(), h in arb_elem(), k in arb_elem()) {
            let lhs = g.compose(&h).compose(&k);
            let rhs = g.compose(&h.compose(&k));
            prop_assert!(close(lhs.b[0], rhs.b[0], 1e-12));
            prop_assert!(close(lhs.b[1], rhs.b[1], 1e-12));
            prop_assert!(close(lhs.a, rhs.a, 1e-12));
            prop_assert!(close(lhs.phi, rhs.phi, 1e-12));
        }

        #[test]
        fn inverse_law(g in arb_elem()) {
            let e = g.compose(&g.inverse());
            prop_assert!(e.b[0].abs() < 1e-12 * (1.0 + g.b[0].abs()));
            prop_assert!(e.b[1].abs() < 1e-12 * (1.0 + g.b[1].abs()));
            prop_assert!(close(e.a, 1.0, 1e-12));
            prop_assert!(e.phi.abs() < 1e-12);
        }

        #[test]
        fn modular_is_a_homomorphism(g in arb_elem(), h in arb_elem()) {
            let lhs = g.compose(&h).modular();
            let rhs = g.modular() * h.modular();
            prop_assert!(close(lhs, rhs, 1e-12));
        }

        #[test]
        fn haar_ratio_is_modular(g in arb_elem()) {
            let ratio = g.haar_density(HaarSide::Left) / g.haar_density(HaarSide::Right);
            prop_assert!(close(ratio, g.modular(), 1e-12));
        }

        #[test]
        fn rotation_preserves_minkowski_form(
            phi in -3.0..3.0f64,
            x0 in -4.0..4.0f64, x1 in -4.0..4.0f64,
            y0 in -4.0..4.0f64, y1 in -4.0..4.0f64,
        ) {
            let m = hyperbolic_rotation(phi);
            let lx = mat_vec(m, [x0, x1]);
            let ly = mat_vec(m, [y0, y1]);
            let scale = 1.0 + minkowski([x0, x1], [y0, y1]).abs()
                + lx[0].abs() + ly[0].abs();
            prop_assert!(
                (minkowski(lx, ly) - minkowski([x0, x1], [y0, y1])).abs() <= 1e-10 * scale
            );
        }

        #[test]
        fn rotation_is_additive(phi in -2.0..2.0f64, psi in -2.0..2.0f64) {
            let lhs = hyperbolic_rotation(phi + psi);
            let a = hyperbolic_rotation(phi);
            let b = hyperbolic_rotation(psi);
            for i in 0..2 {
                for j in 0..2 {
                    let prod = a[i][0] * b[0][j] + a[i][1] * b[1][j];
                    prop_assert!(close(lhs[i][j], prod, 1e-12));
                }
            }
        }

        #[test]
        fn chart_round_trip(x in arb_cone_point()) {
            let h = to_hyperbolic(x).unwrap();
            let back = from_hyperbolic(&h);
            prop_assert!(close(back[0], x[0], 1e-12));
            prop_assert!(close(back[1], x[1], 1e-12));
            // |<x;x>| = s² for the reconstructed point.
            prop_assert!(close(minkowski(back, back).abs(), h.s * h.s, 1e-12));
        }

        #[test]
        fn act_preserves_the_cone_and_charts_translate(
            x in arb_cone_point(),
            a in 0.3..3.0f64,
            phi in -1.5..1.5f64,
        ) {
            let y = act(a, phi, x);
            let hx = to_hyperbolic(x).unwrap();
            let hy = to_hyperbolic(y).unwrap();
            prop_assert_eq!(hx.label, hy.label);
            prop_assert!(close(hy.s, a * hx.s, 1e-12));
            prop_assert!(close(hy.t, hx.t - phi, 1e-10));
        }

        #[test]
        fn recover_params_inverts_act(
            x in arb_cone_point(),
            a in 0.3..3.0f64,
            phi in -1.5..1.5f64,
        ) {
            let y = act(a, phi, x);
            let r = recover_params(x, y).unwrap();
            prop_assert!(close(r.a, a, 1e-11));
            prop_assert!(close(r.phi, phi, 1e-10));
            // Minkowski-form cross-checks: a agrees, cosh phi agrees.
            prop_assert!(close(r.a_minkowski, a, 1e-11));
            prop_assert!((r.cosh_phi_minkowski - phi.cosh()).abs() <= 1e-10 * phi.cosh());
        }

        #[test]
        fn sqrt_element_squares_back(g in arb_elem()) {
            let h = g.sqrt_element();
            let hh = h.compose(&h);
            prop_assert!(close(hh.b[0], g.b[0], 1e-12));
            prop_assert!(close(hh.b[1], g.b[1], 1e-12));
            prop_assert!(close(hh.a, g.a, 1e-12));
            prop_assert!(close(hh.phi, g.phi, 1e-12));
        }
    }
}
