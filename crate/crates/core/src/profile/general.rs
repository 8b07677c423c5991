//! The family `a != 0`, `b != 0`.
//!
//! With `B = b/a^2` and `R(t) = t^2 - t - B` the solution is parametrised by
//! `t` through `s = d E(t) - c/b`, `f = a d t E(t)`, `E = exp(-int_{t0}^t tau/R)`.
//! The `t`-form is singular at `t = +-inf` (where `s = -c/b`), so curves are
//! evaluated in `v = 1/t`, in which `d ln f / dv = (1 + B v) / rho(v)` with
//! `rho(v) = 1 - v - B v^2 = R(1/v) / t^2`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RicciError};
use crate::numeric::exact::sign_a2_plus_4b;
use crate::numeric::roots::{brent, expand_bracket, RootTol};
use crate::params::RicciParams;

/// Root structure of `R(t) = t^2 - t - B`, by the sign of `1 + 4B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RShape {
    /// `t1 < t2`, `R = (t - t1)(t - t2)`.
    Distinct { t1: f64, t2: f64 },
    /// `R = (t - 1/2)^2`.
    Double,
    /// `R = (t - 1/2)^2 + q^2`.
    Complex { q: f64 },
}

/// Partial-fraction data of `tau / R(tau)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialFractions {
    pub big_b: f64,
    pub shape: RShape,
}

impl PartialFractions {
    pub fn new(a: f64, b: f64) -> Self {
        let big_b = b / (a * a);
        let disc = 1.0 + 4.0 * big_b;
        let shape = match sign_a2_plus_4b(a, b) {
            Ordering::Equal => RShape::Double,
            Ordering::Greater => {
                let r = disc.max(0.0).sqrt();
                RShape::Distinct {
                    t1: 0.5 * (1.0 - r),
                    t2: 0.5 * (1.0 + r),
                }
            }
            Ordering::Less => RShape::Complex {
                q: 0.5 * (-disc).max(0.0).sqrt(),
            },
        };
        PartialFractions { big_b, shape }
    }

    /// `1 + 4B`.
    pub fn discriminant(&self) -> f64 {
        1.0 + 4.0 * self.big_b
    }

    pub fn r(&self, t: f64) -> f64 {
        t * t - t - self.big_b
    }

    /// Real roots of `R`, ascending.
    pub fn roots(&self) -> Vec<f64> {
        match self.shape {
            RShape::Distinct { t1, t2 } => vec![t1, t2],
            RShape::Double => vec![0.5],
            RShape::Complex { .. } => vec![],
        }
    }

    /// An antiderivative of `tau / R(tau)`, valid between consecutive roots.
    pub fn antiderivative(&self, t: f64) -> f64 {
        match self.shape {
            RShape::Distinct { t1, t2 } => {
                let a1 = t1 / (t1 - t2);
                let a2 = t2 / (t2 - t1);
                a1 * (t - t1).abs().ln() + a2 * (t - t2).abs().ln()
            }
            RShape::Double => {
                let w = t - 0.5;
                w.abs().ln() - 0.5 / w
            }
            RShape::Complex { q } => {
                let w = t - 0.5;
                0.5 * (w * w + q * q).ln() + ((w / q).atan()) / (2.0 * q)
            }
        }
    }

    /// `rho(v) = 1 - v - B v^2`.
    pub fn rho(&self, v: f64) -> f64 {
        match self.shape {
            RShape::Distinct { t1, t2 } => (1.0 - t1 * v) * (1.0 - t2 * v),
            RShape::Double => (1.0 - 0.5 * v).powi(2),
            RShape::Complex { q } => (1.0 - 0.5 * v).powi(2) + (q * v).powi(2),
        }
    }

    /// An antiderivative of `(1 + B v) / rho(v)`, valid between roots of `rho`.
    pub fn log_radius(&self, v: f64) -> f64 {
        match self.shape {
            RShape::Distinct { t1, t2 } => {
                let a1 = t1 / (t1 - t2);
                let a2 = t2 / (t2 - t1);
                -a1 * (1.0 - t1 * v).abs().ln() - a2 * (1.0 - t2 * v).abs().ln()
            }
            RShape::Double => {
                let w = 1.0 - 0.5 * v;
                -w.abs().ln() + 0.5 * v / w
            }
            RShape::Complex { q } => {
                let w = 1.0 - 0.5 * v;
                -0.5 * (w * w + (q * v).powi(2)).ln() + (q * v).atan2(w) / (2.0 * q)
            }
        }
    }

    /// Roots of `rho`, i.e. `1/t` for the real roots `t` of `R`.
    pub fn rho_roots(&self) -> Vec<f64> {
        let mut r: Vec<f64> = self.roots().into_iter().map(|t| 1.0 / t).collect();
        r.sort_by(f64::total_cmp);
        r
    }

    /// Whether `f -> inf` (rather than `f -> 0`) as `v` approaches the root
    /// `v_root` of `rho` from the side of `v_from`.
    fn blows_up_at(&self, v_root: f64, v_from: f64) -> bool {
        match self.shape {
            RShape::Distinct { t1, t2 } => {
                let coef = if (v_root * t1 - 1.0).abs() < (v_root * t2 - 1.0).abs() {
                    t1 / (t1 - t2)
                } else {
                    t2 / (t2 - t1)
                };
                coef > 0.0
            }
            RShape::Double => v_from < v_root,
            RShape::Complex { .. } => unreachable!("rho has no real roots"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralCaseState {
    pub t: f64,
    pub s: f64,
    pub f: f64,
    #[serde(rename = "B")]
    pub big_b: f64,
    pub t0: f64,
}

fn check_general(params: &RicciParams) -> Result<()> {
    let RicciParams { a, b, d, .. } = *params;
    if a == 0.0 || b == 0.0 || d == 0.0 {
        return Err(RicciError::BadParameters(format!(
            "general case needs a, b, d all nonzero (a = {a}, b = {b}, d = {d})"
        )));
    }
    Ok(())
}

/// `(s(t), f(s(t)))` from the closed-form antiderivative of `tau / R(tau)`
/// with base point `t0`.
pub fn eval_general_case(params: &RicciParams, t0: f64, t: f64) -> Result<GeneralCaseState> {
    check_general(params)?;
    let RicciParams { a, b, c, d, .. } = *params;
    let pf = PartialFractions::new(a, b);
    let (lo, hi) = if t0 <= t { (t0, t) } else { (t, t0) };
    if pf.roots().iter().any(|&r| lo <= r && r <= hi) {
        return Err(RicciError::SingularInterval { t0, t });
    }
    let e = (-(pf.antiderivative(t) - pf.antiderivative(t0))).exp();
    let s = d * e - c / b;
    let f = a * d * t * e;
    if !(f > 0.0) || !f.is_finite() {
        return Err(RicciError::NonPositiveRadius { t, f });
    }
    Ok(GeneralCaseState {
        t,
        s,
        f,
        big_b: pf.big_b,
        t0,
    })
}

/// How the curve ends at an endpoint of its `v`-interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VEndKind {
    /// `|f'| = 1` at finite `s`.
    Tangent,
    /// `f -> inf`, `s -> +-inf`.
    Unbounded,
    /// `f -> 0` while `s -> -c/b`.
    Apex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VEnd {
    pub v: f64,
    pub kind: VEndKind,
}

/// Evaluator for one maximal solution of the general case, anchored at the
/// point where `f' = 0`, i.e. `t0 = -B` with `f(t0) = -b d / a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralProfile {
    pub params: RicciParams,
    pub pf: PartialFractions,
    pub v_star: f64,
    pub f_star: f64,
    l_star: f64,
    pub lo: VEnd,
    pub hi: VEnd,
}

impl GeneralProfile {
    pub fn new(params: &RicciParams) -> Result<Self> {
        check_general(params)?;
        let RicciParams { a, b, d, .. } = *params;
        let pf = PartialFractions::new(a, b);
        let v_star = -1.0 / pf.big_b;
        let f_star = -b * d / a;
        if !(f_star > 0.0) || !f_star.is_finite() {
            return Err(RicciError::NonPositiveRadius {
                t: -pf.big_b,
                f: f_star,
            });
        }
        // |f'| <= 1 with f' = a + (b/a) v
        let e1 = (1.0 - a) * a / b;
        let e2 = (-1.0 - a) * a / b;
        let mut lo = VEnd {
            v: e1.min(e2),
            kind: VEndKind::Tangent,
        };
        let mut hi = VEnd {
            v: e1.max(e2),
            kind: VEndKind::Tangent,
        };
        for r in pf.rho_roots() {
            let kind = if pf.blows_up_at(r, v_star) {
                VEndKind::Unbounded
            } else {
                VEndKind::Apex
            };
            if r < v_star && r >= lo.v {
                lo = VEnd { v: r, kind };
            } else if r > v_star && r <= hi.v {
                hi = VEnd { v: r, kind };
            }
        }
        Ok(GeneralProfile {
            params: *params,
            pf,
            v_star,
            f_star,
            l_star: pf.log_radius(v_star),
            lo,
            hi,
        })
    }

    /// Base point of the `t`-form that reproduces this curve.
    pub fn anchor_t(&self) -> f64 {
        -self.pf.big_b
    }

    pub fn radius_at_v(&self, v: f64) -> f64 {
        self.f_star * (self.pf.log_radius(v) - self.l_star).exp()
    }

    pub fn s_at_v(&self, v: f64) -> f64 {
        let RicciParams { a, b, c, .. } = self.params;
        v * self.radius_at_v(v) / a - c / b
    }

    /// `f' = a + b v / a`.
    pub fn slope_at_v(&self, v: f64) -> f64 {
        let RicciParams { a, b, .. } = self.params;
        a + b * v / a
    }

    pub fn state_at_v(&self, v: f64) -> GeneralCaseState {
        GeneralCaseState {
            t: 1.0 / v,
            s: self.s_at_v(v),
            f: self.radius_at_v(v),
            big_b: self.pf.big_b,
            t0: self.anchor_t(),
        }
    }

    fn s_end(&self, end: VEnd) -> f64 {
        let RicciParams { a, b, c, .. } = self.params;
        match end.kind {
            VEndKind::Tangent => self.s_at_v(end.v),
            VEndKind::Apex => -c / b,
            VEndKind::Unbounded => f64::INFINITY.copysign(end.v / a),
        }
    }

    /// The `s`-interval of the curve together with the `v`-end that produces
    /// each `s`-end (`s` increases with `v` iff `a > 0`).
    pub fn s_interval(&self) -> ((f64, VEnd), (f64, VEnd)) {
        let (first, second) = if self.params.a > 0.0 {
            (self.lo, self.hi)
        } else {
            (self.hi, self.lo)
        };
        ((self.s_end(first), first), (self.s_end(second), second))
    }

    /// Inverts the monotone map `v -> s` on the curve.
    pub fn v_of_s(&self, s: f64) -> Result<f64> {
        let ((s_lo, e_lo), (s_hi, e_hi)) = self.s_interval();
        let inside_lo = if e_lo.kind == VEndKind::Tangent { s >= s_lo } else { s > s_lo };
        let inside_hi = if e_hi.kind == VEndKind::Tangent { s <= s_hi } else { s < s_hi };
        if !(inside_lo && inside_hi) {
            return Err(RicciError::OutsideDomain { s, lo: s_lo, hi: s_hi });
        }
        let s_star = self.s_at_v(self.v_star);
        if s == s_star {
            return Ok(self.v_star);
        }
        let end = if s > s_star { e_hi } else { e_lo };
        if end.kind == VEndKind::Tangent && s == self.s_end(end) {
            return Ok(end.v);
        }
        let h = |v: f64| self.s_at_v(v) - s;
        let (lo, hi) = if end.kind == VEndKind::Tangent {
            let (x, y) = (self.v_star, end.v);
            if x < y { (x, y) } else { (y, x) }
        } else {
            let step = 0.25 * (end.v - self.v_star).abs();
            expand_bracket(h, self.v_star, step, end.v).ok_or(RicciError::OutsideDomain {
                s,
                lo: s_lo,
                hi: s_hi,
            })?
        };
        if lo == hi {
            return Ok(lo);
        }
        let tol = RootTol {
            xtol_abs: 1e-300,
            ..RootTol::default()
        };
        match brent(h, lo, hi, tol) {
            Ok(v) => Ok(v),
            // a tangent endpoint can sit a rounding error past s
            Err(_) if end.kind == VEndKind::Tangent => Ok(end.v),
            Err(e) => Err(e),
        }
    }

    pub fn radius(&self, s: f64) -> Result<f64> {
        Ok(self.radius_at_v(self.v_of_s(s)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::quad::{integrate, QuadTol};

    fn p(a: f64, b: f64, c: f64, d: f64) -> RicciParams {
        RicciParams::new(a, b, c, d)
    }

    #[test]
    fn anchor_example() {
        let st = eval_general_case(&p(2.0, 8.0, 0.0, -1.0), -2.0, -2.0).unwrap();
        assert_eq!((st.s, st.f), (-1.0, 4.0));
        let gp = GeneralProfile::new(&p(2.0, 8.0, 0.0, -1.0)).unwrap();
        assert_eq!(gp.anchor_t(), -2.0);
        assert_eq!(gp.f_star, 4.0);
        assert_eq!(gp.s_at_v(gp.v_star), -1.0);
    }

    #[test]
    fn t_form_matches_quadrature() {
        let cases = [
            (p(2.0, 8.0, 0.0, -1.0), -2.0, -1.5),
            (p(2.0, -1.0, 0.0, 1.0), 2.0, 3.0),
            (p(1.0, -1.0, 0.5, 1.0), 1.0, 4.0),
            (p(-1.5, 0.7, 0.2, -2.0), 1.5, 2.5),
        ];
        for (params, t0, t) in cases {
            let pf = PartialFractions::new(params.a, params.b);
            let q = integrate(|x| x / pf.r(x), t0, t, QuadTol::abs(1e-13)).unwrap();
            let e = (-q.value).exp();
            let st = eval_general_case(&params, t0, t).unwrap();
            assert!((st.s - (params.d * e - params.c / params.b)).abs() < 1e-10);
            assert!((st.f - params.a * params.d * t * e).abs() < 1e-10);
            let identity = params.a * t * (st.s + params.c / params.b);
            assert!((st.f - identity).abs() <= 1e-12 * st.f);
        }
    }

    #[test]
    fn double_root_branch_is_used() {
        let pf = PartialFractions::new(2.0, -1.0);
        assert_eq!(pf.shape, RShape::Double);
        assert_eq!(pf.big_b, -0.25);
    }

    #[test]
    fn t_form_errors() {
        let params = p(2.0, 8.0, 0.0, -1.0);
        assert!(matches!(
            eval_general_case(&params, -2.0, -0.5),
            Err(RicciError::SingularInterval { .. })
        ));
        assert!(matches!(
            eval_general_case(&params, 0.5, 1.0),
            Err(RicciError::NonPositiveRadius { .. })
        ));
    }

    #[test]
    fn log_radius_derivative() {
        for (a, b) in [(2.0, 8.0), (2.0, -1.0), (1.0, -1.0), (0.5, 3.0), (-3.0, 1.0)] {
            let pf = PartialFractions::new(a, b);
            for v in [-0.4, -0.1, 0.0, 0.3] {
                if pf.rho(v).abs() < 0.2 {
                    continue;
                }
                let h = 1e-6;
                let fd = (pf.log_radius(v + h) - pf.log_radius(v - h)) / (2.0 * h);
                let exact = (1.0 + pf.big_b * v) / pf.rho(v);
                assert!((fd - exact).abs() < 1e-7 * exact.abs().max(1.0), "{a} {b} {v}");
            }
        }
    }

    #[test]
    fn v_form_agrees_with_t_form() {
        for params in [p(2.0, 8.0, 0.0, -1.0), p(1.0, -1.0, 0.5, 1.0), p(-1.5, 0.7, 0.2, 2.0)] {
            let gp = GeneralProfile::new(&params).unwrap();
            let t0 = gp.anchor_t();
            for frac in [0.1, 0.4, 0.6, 0.9] {
                let v = gp.lo.v + frac * (gp.hi.v - gp.lo.v);
                // the t-form cannot pass through t = inf
                if v * gp.v_star <= 0.0 {
                    continue;
                }
                let st = eval_general_case(&params, t0, 1.0 / v).unwrap();
                assert!((gp.radius_at_v(v) - st.f).abs() < 1e-12 * st.f);
                assert!((gp.s_at_v(v) - st.s).abs() < 1e-12 * st.s.abs().max(1.0));
            }
        }
    }

    #[test]
    fn example_interval_is_tangent_bounded() {
        let gp = GeneralProfile::new(&p(2.0, 8.0, 0.0, -1.0)).unwrap();
        assert_eq!((gp.lo.v, gp.hi.v), (-0.75, -0.25));
        assert_eq!(gp.lo.kind, VEndKind::Tangent);
        assert!((gp.slope_at_v(gp.lo.v) + 1.0).abs() < 1e-15);
        let ((s_lo, _), (s_hi, _)) = gp.s_interval();
        assert!(s_lo < -1.0 && -1.0 < s_hi);
        for s in [s_lo, -1.2, -1.0, -0.7, s_hi] {
            let v = gp.v_of_s(s).unwrap();
            assert!((gp.s_at_v(v) - s).abs() < 1e-13);
        }
        assert!(gp.v_of_s(s_hi + 1e-3).is_err());
    }

    #[test]
    fn crossing_t_infinity_is_regular() {
        // v = 0 lies inside: s passes through -c/b with finite f
        let params = p(0.5, 0.1, 0.3, -2.0);
        let gp = GeneralProfile::new(&params).unwrap();
        assert!(gp.lo.v < 0.0 && 0.0 < gp.hi.v);
        let f0 = gp.radius_at_v(0.0);
        assert!(f0.is_finite() && f0 > 0.0);
        assert!((gp.s_at_v(0.0) + 3.0).abs() < 1e-15);
        let v = gp.v_of_s(-3.0).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn unbounded_and_apex_ends() {
        // a = 1, b = -1: R has no real roots, v in [0, 2]; v = 0 is a tangent end
        let gp = GeneralProfile::new(&p(1.0, -1.0, 0.0, 1.0)).unwrap();
        assert_eq!(gp.pf.rho_roots(), Vec::<f64>::new());
        // a = 0.5, b = 1: B = 4, roots t = (1 -+ sqrt 17)/2
        let gp = GeneralProfile::new(&p(0.5, 1.0, 0.0, -1.0)).unwrap();
        let ((s_lo, e_lo), (s_hi, e_hi)) = gp.s_interval();
        assert!(s_lo < s_hi);
        for (s_end, e) in [(s_lo, e_lo), (s_hi, e_hi)] {
            match e.kind {
                VEndKind::Unbounded => assert!(s_end.is_infinite()),
                VEndKind::Apex => assert_eq!(s_end, 0.0),
                VEndKind::Tangent => assert!(s_end.is_finite()),
            }
        }
    }
}
