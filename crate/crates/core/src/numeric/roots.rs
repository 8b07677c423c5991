//! Bracketed scalar root finding.

use crate::error::{Result, RicciError};

/// Stopping tolerances for [`brent`].
#[derive(Debug, Clone, Copy)]
pub struct RootTol {
    pub xtol_abs: f64,
    pub xtol_rel: f64,
    pub max_iter: usize,
}

impl Default for RootTol {
    fn default() -> Self {
        RootTol {
            xtol_abs: 0.0,
            xtol_rel: 4.0 * f64::EPSILON,
            max_iter: 200,
        }
    }
}

/// Brent's method (inverse quadratic interpolation, secant and bisection) on a
/// sign-changing bracket `[lo, hi]`.
pub fn brent<F>(mut f: F, lo: f64, hi: f64, tol: RootTol) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(RicciError::Numerical(format!(
            "brent: [{lo}, {hi}] is not a bracket (f = {fa}, {fb})"
        )));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..tol.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let xtol = 0.5 * (tol.xtol_abs + tol.xtol_rel * b.abs()).max(f64::MIN_POSITIVE);
        let m = 0.5 * (c - b);
        if m.abs() <= xtol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= xtol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (xtol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > xtol { d } else { xtol.copysign(m) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(RicciError::Numerical(format!("brent: f({b}) = {fb}")));
        }
    }
    Err(RicciError::Numerical("brent: iteration limit".into()))
}

/// Walks from `start` in steps that double each time until `f` changes sign
/// relative to `f(start)`, never stepping past `limit`. Returns the bracket
/// in increasing order, or `None` if the sign never changes.
pub fn expand_bracket<F>(mut f: F, start: f64, first_step: f64, limit: f64) -> Option<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let f0 = f(start);
    if !f0.is_finite() {
        return None;
    }
    let dir = (limit - start).signum();
    let mut step = first_step.abs().max(f64::MIN_POSITIVE);
    let mut prev = start;
    for _ in 0..2000 {
        let mut next = prev + dir * step;
        let past = if dir > 0.0 { next >= limit } else { next <= limit };
        if past {
            // approach the limit geometrically instead of jumping over it
            next = prev + 0.5 * (limit - prev);
            if next == prev {
                return None;
            }
        }
        let fv = f(next);
        if !fv.is_finite() {
            return None;
        }
        if fv.signum() != f0.signum() {
            return Some(if prev < next { (prev, next) } else { (next, prev) });
        }
        if fv == 0.0 {
            return Some((next, next));
        }
        prev = next;
        step *= 2.0;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_sqrt2() {
        let r = brent(|x| x * x - 2.0, 0.0, 2.0, RootTol::default()).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn brent_rejects_non_bracket() {
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, RootTol::default()).is_err());
    }

    #[test]
    fn brent_handles_flat_log() {
        // steep on one side, flat on the other
        let r = brent(|x| x.ln() + 30.0, 1e-20, 1.0, RootTol::default()).unwrap();
        assert!((r / (-30f64).exp() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn expand_finds_far_root() {
        let (lo, hi) = expand_bracket(|x| x - 1e6, 0.0, 1.0, f64::INFINITY).unwrap();
        assert!(lo <= 1e6 && 1e6 <= hi);
    }

    #[test]
    fn expand_respects_limit() {
        assert!(expand_bracket(|x| x - 10.0, 0.0, 1.0, 5.0).is_none());
        let (lo, hi) = expand_bracket(|x| 1.0 - x, 0.0, 0.25, 1.0 + 1e-12).unwrap();
        assert!(lo <= 1.0 && 1.0 <= hi);
    }
}
