//! Closed-form curvature of a rotational surface whose radius obeys
//! `f f' = a f + b s + c`, and the rotational Ricci residual
//! `K K'' - K'^2 - 4 K^3 + (f'/f) K K'`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RicciError};
use crate::params::RicciParams;

/// `(a f + b s + c)^2` may be at most this fraction of `f^2` for the mean
/// curvature to be reported.
pub const HORIZONTAL_TANGENT_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSample {
    pub s: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "Kp")]
    pub kp: f64,
    #[serde(rename = "Kpp")]
    pub kpp: f64,
    /// `None` at a horizontal tangent, where `H` is unbounded.
    #[serde(rename = "H")]
    pub h: Option<f64>,
    pub k1: f64,
    /// Infinite at a horizontal tangent.
    pub k2: f64,
    pub residual: f64,
    pub residual_normalized: f64,
}

/// Gaussian curvature `((bs+c)^2 + a f (bs+c) - b f^2) / f^4`.
pub fn gauss_k(params: &RicciParams, s: f64, f: f64) -> f64 {
    let RicciParams { a, b, c, .. } = *params;
    let w = b * s + c;
    let f2 = f * f;
    (w * w + a * f * w - b * f2) / (f2 * f2)
}

/// `(K', K'')` from the closed forms in terms of `K`.
pub fn gauss_k_derivs(params: &RicciParams, s: f64, f: f64, k: f64) -> (f64, f64) {
    let RicciParams { a, b, c, .. } = *params;
    let w = b * s + c;
    let f2 = f * f;
    let kp = -(3.0 * a * f + 4.0 * w) / f2 * k;
    let kpp = (24.0 * w * w + 35.0 * a * w * f + 4.0 * (3.0 * a * a - b) * f2) / (f2 * f2) * k;
    (kp, kpp)
}

/// Mean curvature `((b-1) f + a (a f + b s + c)) / (2 f sqrt(f^2 - (a f + b s + c)^2))`.
pub fn mean_h(params: &RicciParams, s: f64, f: f64) -> Result<f64> {
    let RicciParams { a, b, .. } = *params;
    let w = params.rhs(s, f);
    let gap = f * f - w * w;
    if w * w > (1.0 - HORIZONTAL_TANGENT_MARGIN) * f * f {
        return Err(RicciError::HorizontalTangent { s });
    }
    Ok(((b - 1.0) * f + a * w) / (2.0 * f * gap.sqrt()))
}

/// Principal curvatures `k1 = -g'/f`, `k2 = g' f'' - g'' f'` of the profile
/// `(f, 0, g)` parametrised by arc length.
pub fn principal_curvatures(f: f64, fp: f64, fpp: f64, gp: f64, gpp: f64) -> Result<(f64, f64)> {
    let unit = fp * fp + gp * gp;
    if (unit - 1.0).abs() > 1e-10 {
        return Err(RicciError::ArcLengthViolation { value: unit });
    }
    Ok((-gp / f, gp * fpp - gpp * fp))
}

/// `K K'' - K'^2 - 4 K^3 + (f'/f) K K'`.
pub fn ricci_residual(k: f64, kp: f64, kpp: f64, f: f64, fp: f64) -> f64 {
    k * kpp - kp * kp - 4.0 * k * k * k + fp / f * k * kp
}

/// Residual divided by `K^2 (|K''| + K'^2 + |K|^3 + 1)`; the raw value when
/// `K = 0`.
pub fn normalized_residual(raw: f64, k: f64, kp: f64, kpp: f64) -> f64 {
    if k == 0.0 {
        return raw.abs();
    }
    raw.abs() / (k * k * (kpp.abs() + kp * kp + k.abs().powi(3) + 1.0))
}

/// `4K - Delta log(-K)` with `Delta u = u'' + (f'/f) u'` for `K < 0`.
pub fn log_condition_residual(k: f64, kp: f64, kpp: f64, f: f64, fp: f64) -> f64 {
    let l1 = kp / k;
    let l2 = kpp / k - l1 * l1;
    4.0 * k - (l2 + fp / f * l1)
}

/// All closed-form curvature quantities at a point `(s, f)` of a solution.
pub fn curvature_sample(params: &RicciParams, s: f64, f: f64) -> CurvatureSample {
    let k = gauss_k(params, s, f);
    let (kp, kpp) = gauss_k_derivs(params, s, f, k);
    let fp = params.slope(s, f).clamp(-1.0, 1.0);
    let gp = (1.0 - fp * fp).max(0.0).sqrt();
    let h = mean_h(params, s, f).ok();
    let k1 = -gp / f;
    // f'' = -K f and g'' = -f' f'' / g' give k2 = f'' / g'
    let k2 = if gp > 0.0 { -k * f / gp } else { f64::INFINITY };
    let raw = ricci_residual(k, kp, kpp, f, fp);
    CurvatureSample {
        s,
        k,
        kp,
        kpp,
        h,
        k1,
        k2,
        residual: raw,
        residual_normalized: normalized_residual(raw, k, kp, kpp),
    }
}
