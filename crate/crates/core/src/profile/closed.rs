//! Closed-form radius functions for the `a = 0` and `b = 0` families.

use crate::error::{Result, RicciError};
use crate::numeric::roots::{brent, expand_bracket, RootTol};
use crate::params::Branch;

/// `sqrt(b s^2 + 2 c s + d)`. No domain check beyond positivity of the radicand.
pub fn eval_f_case_a0(b: f64, c: f64, d: f64, s: f64) -> Result<f64> {
    let q = b * s * s + 2.0 * c * s + d;
    if q > 0.0 {
        Ok(q.sqrt())
    } else {
        Err(RicciError::NonPositiveRadicand { s, radicand: q })
    }
}

/// Feasible range of `u = sigma (a f + c)` given `u > 0` and `f > 0`.
fn feasible_u(a: f64, c: f64, branch: Branch) -> Option<(f64, f64)> {
    // f = (sigma u - c) / a > 0
    let range = match (a > 0.0, branch) {
        (true, Branch::Plus) => (c.max(0.0), f64::INFINITY),
        (true, Branch::Minus) => (0.0, -c),
        (false, Branch::Plus) => (0.0, c),
        (false, Branch::Minus) => ((-c).max(0.0), f64::INFINITY),
    };
    (range.1 > range.0).then_some(range)
}

/// Radius on the `b = 0` branch: the unique `f > 0` with
/// `a f - c ln(sigma (a f + c)) = a^2 s + d` and `sigma (a f + c) > 0`.
///
/// Works on the whole feasible set of the branch, which may extend past the
/// point where `|f'| = 1`.
pub fn eval_f_case_b0(a: f64, c: f64, d: f64, branch: Branch, s: f64) -> Result<f64> {
    Ok(eval_b0_with_u(a, c, d, branch, s)?.0)
}

/// `(f, u)` with `u = sigma (a f + c)` taken from the root in `ln u`, so it
/// keeps full relative accuracy where `a f + c` cancels.
pub(crate) fn eval_b0_with_u(a: f64, c: f64, d: f64, branch: Branch, s: f64) -> Result<(f64, f64)> {
    if a == 0.0 || !a.is_finite() {
        return Err(RicciError::BadParameters(format!(
            "b = 0 family needs a != 0 (a = {a})"
        )));
    }
    let sigma = branch.sign();
    let (u_lo, u_hi) = feasible_u(a, c, branch).ok_or_else(|| {
        RicciError::BranchViolation(format!(
            "no f > 0 has sign({sigma}) (a f + c) > 0 for a = {a}, c = {c}"
        ))
    })?;
    let rhs = a * a * s + d + c;
    // psi(u) = sigma u - c ln u is monotone on the feasible range; solve in ln u
    let h = |lam: f64| sigma * lam.exp() - c * lam - rhs;
    let lam_lo = u_lo.ln();
    let lam_hi = u_hi.ln();
    let start = match (lam_lo.is_finite(), lam_hi.is_finite()) {
        (true, true) => 0.5 * (lam_lo + lam_hi),
        (true, false) => lam_lo + 1.0,
        (false, true) => lam_hi - 1.0,
        (false, false) => 0.0,
    };
    let h0 = h(start);
    if h0 == 0.0 {
        return Ok((finish(a, c, d, sigma, start, s), start.exp()));
    }
    let step = if lam_lo.is_finite() && lam_hi.is_finite() {
        0.25 * (lam_hi - lam_lo)
    } else {
        1.0
    };
    // h is monotone, so its slope at the start points toward the root
    let slope = sigma * start.exp() - c;
    let (toward, away) = if h0 * slope > 0.0 { (lam_lo, lam_hi) } else { (lam_hi, lam_lo) };
    let bracket = expand_bracket(h, start, step, toward)
        .or_else(|| expand_bracket(h, start, step, away))
        .ok_or(RicciError::NoBracket { s })?;
    let tol = RootTol {
        xtol_abs: 1e-300,
        ..RootTol::default()
    };
    let lam = if bracket.0 == bracket.1 {
        bracket.0
    } else {
        brent(h, bracket.0, bracket.1, tol)?
    };
    Ok((finish(a, c, d, sigma, lam, s), lam.exp()))
}

/// Converts the root in `ln u` back to `f` and polishes it with Newton steps
/// on the original equation, which avoids cancellation in `(sigma u - c)/a`.
fn finish(a: f64, c: f64, d: f64, sigma: f64, lam: f64, s: f64) -> f64 {
    let mut f = (sigma * lam.exp() - c) / a;
    let target = a * a * s + d;
    for _ in 0..2 {
        let u = sigma * (a * f + c);
        if !(u > 0.0) || !(f > 0.0) {
            break;
        }
        let g = a * f - c * u.ln() - target;
        let dg = a * a * f / (a * f + c);
        let next = f - g / dg;
        if !(next > 0.0) || !(sigma * (a * next + c) > 0.0) {
            break;
        }
        f = next;
    }
    f
}

/// Residual `a f - c ln(sigma (a f + c)) - a^2 s - d` of the implicit equation.
pub fn implicit_residual(a: f64, c: f64, d: f64, branch: Branch, s: f64, f: f64) -> f64 {
    a * f - c * (branch.sign() * (a * f + c)).ln() - a * a * s - d
}
