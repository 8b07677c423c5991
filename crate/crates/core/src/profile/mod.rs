//! Radius functions `f(s)` of the rotational Ricci profiles: closed forms for
//! each family and an IVP integrator as an independent path.

mod closed;
mod general;
mod ivp;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

pub use closed::{eval_f_case_a0, eval_f_case_b0, implicit_residual};
pub use general::{
    eval_general_case, GeneralCaseState, GeneralProfile, PartialFractions, RShape, VEnd, VEndKind,
};
pub use ivp::{solve_ivp, solve_ivp_with, IvpOptions, IvpSolution, IvpStop};

use crate::error::{Result, RicciError};
use crate::numeric::exact::sign_c2_minus_bd;
use crate::params::{excluded_set, Branch, RicciParams};

/// The closed-form evaluator that applies to a parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileModel {
    /// `f = sqrt(b s^2 + 2 c s + d)`.
    Quadratic { b: f64, c: f64, d: f64 },
    /// `a f - c ln(sigma (a f + c)) = a^2 s + d`.
    Implicit { a: f64, c: f64, d: f64, branch: Branch },
    General(GeneralProfile),
    /// `f = m s + r`: cylinders, cones and planes.
    Affine { m: f64, r: f64 },
}

impl ProfileModel {
    pub fn new(params: &RicciParams) -> Result<Self> {
        let RicciParams { a, b, c, d, branch } = *params;
        if let Some(set) = excluded_set(a, b, c) {
            return Err(RicciError::Inadmissible { a, b, c, set });
        }
        if a == 0.0 {
            if b == 0.0 && c == 0.0 {
                if d > 0.0 {
                    return Ok(ProfileModel::Affine { m: 0.0, r: d.sqrt() });
                }
                return Err(RicciError::EmptyDomain(format!("cylinder with d = {d} <= 0")));
            }
            if sign_c2_minus_bd(b, c, d) == Ordering::Equal {
                // b s^2 + 2 c s + d = (sqrt(b) s + c/sqrt(b))^2
                if b > 0.0 && b <= 1.0 {
                    let sigma = branch.sign();
                    let rb = b.sqrt();
                    return Ok(ProfileModel::Affine {
                        m: sigma * rb,
                        r: sigma * c / rb,
                    });
                }
                return Err(RicciError::EmptyDomain(format!(
                    "flat profile with b = {b} has |f'| > 1 or no positive radius"
                )));
            }
            return Ok(ProfileModel::Quadratic { b, c, d });
        }
        if b == 0.0 {
            if c == 0.0 {
                return Ok(ProfileModel::Affine { m: a, r: d / a });
            }
            return Ok(ProfileModel::Implicit { a, c, d, branch });
        }
        Ok(ProfileModel::General(GeneralProfile::new(params)?))
    }

    /// `f(s)`. Outside the maximal interval the result is either an error or
    /// the analytic continuation of the closed form.
    pub fn radius(&self, s: f64) -> Result<f64> {
        match *self {
            ProfileModel::Quadratic { b, c, d } => eval_f_case_a0(b, c, d, s),
            ProfileModel::Implicit { a, c, d, branch } => eval_f_case_b0(a, c, d, branch, s),
            ProfileModel::General(ref gp) => gp.radius(s),
            ProfileModel::Affine { m, r } => {
                let f = m * s + r;
                if f > 0.0 {
                    Ok(f)
                } else {
                    Err(RicciError::NonPositiveRadicand { s, radicand: f })
                }
            }
        }
    }
}

/// Parameters with `d` (and, for `b = 0`, the branch) chosen so that the
/// closed-form profile passes through `(s, f)`. In the general case the point
/// must lie on the piece containing `f' = 0`.
pub fn calibrate(params: &RicciParams, s: f64, f: f64) -> Result<RicciParams> {
    let RicciParams { a, b, c, .. } = *params;
    if !(f > 0.0) {
        return Err(RicciError::NonPositiveRadicand { s, radicand: f });
    }
    let mut out = *params;
    if a == 0.0 {
        out.d = f * f - b * s * s - 2.0 * c * s;
        if let Some(branch) = slope_branch(params.rhs(s, f)) {
            out.branch = branch;
        }
        return Ok(out);
    }
    if b == 0.0 {
        let w = a * f + c;
        if w == 0.0 {
            return Err(RicciError::BranchViolation(format!("a f + c = 0 at s = {s}")));
        }
        out.branch = if w > 0.0 { Branch::Plus } else { Branch::Minus };
        out.d = if c == 0.0 {
            a * (f - a * s)
        } else {
            a * f - c * w.abs().ln() - a * a * s
        };
        return Ok(out);
    }
    // v = a (s + c/b) / f, then f* = f exp(L(v*) - L(v))
    let pf = PartialFractions::new(a, b);
    let v = a * (b * s + c) / (b * f);
    let v_star = -1.0 / pf.big_b;
    let (lo, hi) = (v.min(v_star), v.max(v_star));
    if pf.rho_roots().iter().any(|&r| r > lo && r < hi) || pf.rho(v) <= 0.0 {
        return Err(RicciError::SingularInterval { t0: -pf.big_b, t: 1.0 / v });
    }
    let f_star = f * (pf.log_radius(v_star) - pf.log_radius(v)).exp();
    out.d = -a * f_star / b;
    Ok(out)
}

/// Branch selected by the sign of `f'` for flat `a = 0` profiles.
fn slope_branch(fp_times_f: f64) -> Option<Branch> {
    if fp_times_f > 0.0 {
        Some(Branch::Plus)
    } else if fp_times_f < 0.0 {
        Some(Branch::Minus)
    } else {
        None
    }
}

impl ProfileModel {
    /// `(f, K)` at `s`, with `K` from a form free of the cancellation in
    /// `(w^2 + a f w - b f^2) / f^4`: `(c^2 - b d) / f^4` for `a = 0`,
    /// `c sigma (a f + c) / f^4` for `b = 0` and `-b rho(v) / f^2` otherwise.
    pub fn curvature(&self, s: f64) -> Result<(f64, f64)> {
        match *self {
            ProfileModel::Quadratic { b, c, d } => {
                let f = eval_f_case_a0(b, c, d, s)?;
                let f2 = f * f;
                Ok((f, (c * c - b * d) / (f2 * f2)))
            }
            ProfileModel::Implicit { a, c, d, branch } => {
                let (f, u) = closed::eval_b0_with_u(a, c, d, branch, s)?;
                let f2 = f * f;
                Ok((f, c * branch.sign() * u / (f2 * f2)))
            }
            ProfileModel::General(ref gp) => {
                let v = gp.v_of_s(s)?;
                let f = gp.radius_at_v(v);
                Ok((f, -gp.params.b * gp.pf.rho(v) / (f * f)))
            }
            ProfileModel::Affine { .. } => Ok((self.radius(s)?, 0.0)),
        }
    }
}
