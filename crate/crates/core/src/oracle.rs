//! Independent checks of sampled profiles: finite-difference curvature and
//! Ricci residuals, ODE and arc-length audits, and a seeded generator of
//! admissible test cases.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{classify, DomainInterval, EndpointKind};
use crate::curvature::{curvature_sample, normalized_residual, ricci_residual};
use crate::error::{Result, RicciError};
use crate::geometry::{height_g_with, ProfileCurve};
use crate::params::{Branch, RicciParams};
use crate::profile::{GeneralProfile, ProfileModel, VEnd, VEndKind};

/// Step of the central differences for `K'` and `K''`.
pub const FD_STEP: f64 = 1e-4;
/// Step of the second differences for `f''`.
pub const K_FD_STEP: f64 = 1e-3;
/// `|K| f^2` below this counts as flat.
pub const FLAT_SCALE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationTolerances {
    pub ode: f64,
    pub ricci_closed: f64,
    pub ricci_fd: f64,
    pub arclength: f64,
    pub k_fd: f64,
}

impl Default for ValidationTolerances {
    fn default() -> Self {
        ValidationTolerances {
            ode: 1e-4,
            ricci_closed: 1e-9,
            ricci_fd: 1e-4,
            arclength: 1e-6,
            k_fd: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// `max |f f' - (a f + b s + c)| / max(1, f)` with `f'` from a five-point
    /// stencil on the stored samples.
    pub max_ode_residual: f64,
    pub max_ricci_residual_closed: f64,
    pub max_ricci_residual_fd: f64,
    /// `max |dg - int sqrt(1 - f'^2) ds|` over consecutive stored samples.
    pub max_arclength_violation: f64,
    /// `max |K_fd - K| / max(1, |K|)`.
    #[serde(rename = "max_K_fd_error")]
    pub max_k_fd_error: f64,
    pub sign_constant: bool,
    pub samples: usize,
    pub resamples: usize,
    pub notes: Vec<String>,
    pub passed: bool,
}

/// `d/dx` of the Lagrange interpolant through `xs`, evaluated at `x0`.
fn derivative_weights(xs: &[f64], x0: f64) -> Vec<f64> {
    let n = xs.len();
    (0..n)
        .map(|j| {
            let denom: f64 = (0..n).filter(|&l| l != j).map(|l| xs[j] - xs[l]).product();
            let num: f64 = (0..n)
                .filter(|&m| m != j)
                .map(|m| {
                    (0..n)
                        .filter(|&l| l != j && l != m)
                        .map(|l| x0 - xs[l])
                        .product::<f64>()
                })
                .sum();
            num / denom
        })
        .collect()
}

/// Five-point (fewer for short inputs) first derivatives on a nonuniform grid.
pub fn fd_first_derivative(s: &[f64], y: &[f64]) -> Vec<f64> {
    let n = s.len();
    let w = n.min(5);
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(w / 2).min(n - w);
            let xs = &s[start..start + w];
            derivative_weights(xs, s[i])
                .iter()
                .zip(&y[start..start + w])
                .map(|(c, v)| c * v)
                .sum()
        })
        .collect()
}

fn uniform_step(samples: &[(f64, f64)]) -> Result<f64> {
    let h = (samples[samples.len() - 1].0 - samples[0].0) / (samples.len() - 1) as f64;
    if !(h > 0.0) {
        return Err(RicciError::BadParameters("samples must increase in s".into()));
    }
    for (i, w) in samples.windows(2).enumerate() {
        if ((w[1].0 - w[0].0) - h).abs() > 1e-6 * h {
            return Err(RicciError::BadParameters(format!("samples are not uniform at index {i}")));
        }
    }
    Ok(h)
}

/// `K = -f''/f` at the interior points of uniform `(s, f)` samples, with `f''`
/// from central second differences (error `O(h^2)`).
pub fn fd_gauss_k(samples: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if samples.len() < 5 {
        return Err(RicciError::TooFewSamples {
            needed: 5,
            got: samples.len(),
        });
    }
    let h = uniform_step(samples)?;
    Ok(samples
        .windows(3)
        .map(|w| {
            let fpp = (w[0].1 - 2.0 * w[1].1 + w[2].1) / (h * h);
            (w[1].0, -fpp / w[1].1)
        })
        .collect())
}

/// `(L'' + (f'/f) L' - 4K) / max(1, 4|K|)` with `L = ln(-K)`, at interior points
/// of uniform samples with spacing `h`. Errors with `s` measured from the first sample.
pub fn fd_log_condition(k_samples: &[f64], f_samples: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = k_samples.len();
    if n < 3 || f_samples.len() != n {
        return Err(RicciError::TooFewSamples { needed: 3, got: n.min(f_samples.len()) });
    }
    if let Some((i, &k)) = k_samples.iter().enumerate().find(|(_, &k)| !(k < 0.0)) {
        return Err(RicciError::NonNegativeK { s: i as f64 * h, k });
    }
    let l: Vec<f64> = k_samples.iter().map(|k| (-k).ln()).collect();
    Ok((1..n - 1)
        .map(|i| {
            let lp = (l[i + 1] - l[i - 1]) / (2.0 * h);
            let lpp = (l[i + 1] - 2.0 * l[i] + l[i - 1]) / (h * h);
            let fp = (f_samples[i + 1] - f_samples[i - 1]) / (2.0 * h);
            let k = k_samples[i];
            (lpp + fp / f_samples[i] * lp - 4.0 * k) / (4.0 * k.abs()).max(1.0)
        })
        .collect())
}

#[derive(Debug, Clone, Copy)]
struct Resampled {
    closed: f64,
    fd: f64,
    k_err: f64,
    /// `K f^2`, compared against [`FLAT_SCALE`] for sign checks.
    k_scaled: f64,
}

fn resample_point(params: &RicciParams, model: &ProfileModel, s: f64) -> Result<Resampled> {
    let (f, k) = model.curvature(s)?;
    let closed = curvature_sample(params, s, f).residual_normalized;
    let h = FD_STEP;
    let ((fm, km), (fpl, kpl)) = (model.curvature(s - h)?, model.curvature(s + h)?);
    let kp = (kpl - km) / (2.0 * h);
    let kpp = (kpl - 2.0 * k + km) / (h * h);
    let fp = (fpl - fm) / (2.0 * h);
    let fd = normalized_residual(ricci_residual(k, kp, kpp, f, fp), k, kp, kpp);
    let hk = K_FD_STEP;
    let stencil = (-2..=2)
        .map(|j| {
            let x = s + j as f64 * hk;
            Ok((x, if j == 0 { f } else { model.radius(x)? }))
        })
        .collect::<Result<Vec<_>>>()?;
    let k_fd = fd_gauss_k(&stencil)?[1].1;
    // rounding noise in a vanishing K has no meaningful derivatives
    let flat = [km, k, kpl].iter().all(|k| k.abs() * f * f < FLAT_SCALE);
    Ok(Resampled {
        closed,
        fd: if flat { 0.0 } else { fd },
        k_err: (k_fd - k).abs() / k.abs().max(1.0),
        k_scaled: k * f * f,
    })
}

/// [`validate_curve_with`] with default tolerances and `max(n, 2)` resamples.
pub fn validate_curve(curve: &ProfileCurve) -> ValidationReport {
    validate_curve_with(curve, &ValidationTolerances::default(), curve.len().max(2))
}

/// Audits the stored samples against the ODE and the arc-length condition, then
/// resamples uniformly through the closed-form evaluator and compares the
/// closed-form Ricci residual with finite differences.
pub fn validate_curve_with(curve: &ProfileCurve, tol: &ValidationTolerances, n_resample: usize) -> ValidationReport {
    let params = curve.params;
    let mut notes = Vec::new();
    let mut report = ValidationReport {
        max_ode_residual: 0.0,
        max_ricci_residual_closed: 0.0,
        max_ricci_residual_fd: 0.0,
        max_arclength_violation: 0.0,
        max_k_fd_error: 0.0,
        sign_constant: true,
        samples: curve.len(),
        resamples: 0,
        notes: Vec::new(),
        passed: false,
    };
    if curve.len() < 2 {
        report.notes.push(format!("{} samples, need at least 2", curve.len()));
        return report;
    }
    let s: Vec<f64> = curve.samples.iter().map(|x| x.s).collect();
    let f: Vec<f64> = curve.samples.iter().map(|x| x.f).collect();
    let fp = fd_first_derivative(&s, &f);
    report.max_ode_residual = s
        .iter()
        .zip(&f)
        .zip(&fp)
        .map(|((&s, &f), &fp)| (f * fp - params.rhs(s, f)).abs() / f.max(1.0))
        .fold(0.0, f64::max);
    let (mut pos, mut neg) = (false, false);
    for x in &curve.samples {
        let c = curvature_sample(&params, x.s, x.f);
        report.max_ricci_residual_closed = report.max_ricci_residual_closed.max(c.residual_normalized);
        pos |= c.k * x.f * x.f > FLAT_SCALE;
        neg |= c.k * x.f * x.f < -FLAT_SCALE;
    }

    let evaluator = classify(&params).and_then(|r| Ok((r, ProfileModel::new(&params)?)));
    match evaluator {
        Err(e) => notes.push(format!("no closed-form evaluator: {e}")),
        Ok((report_c, model)) => {
            let radius = |x: f64| model.radius(x);
            let arc: Result<Vec<f64>> = curve
                .samples
                .par_windows(2)
                .map(|w| {
                    let dg = height_g_with(&params, &radius, &report_c.interval, w[0].s, w[1].s)?;
                    Ok((w[1].g - w[0].g - dg).abs())
                })
                .collect();
            match arc {
                Ok(v) => report.max_arclength_violation = v.into_iter().fold(0.0, f64::max),
                Err(e) => {
                    report.max_arclength_violation = f64::INFINITY;
                    notes.push(format!("arc-length audit failed: {e}"));
                }
            }
            let margin = 2.0 * K_FD_STEP;
            let (lo, hi) = (s[0] + margin, s[s.len() - 1] - margin);
            if hi > lo {
                let n = n_resample.max(2);
                let grid: Vec<f64> = (0..n)
                    .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
                    .collect();
                let res: Result<Vec<Resampled>> =
                    grid.par_iter().map(|&x| resample_point(&params, &model, x)).collect();
                match res {
                    Ok(v) => {
                        report.resamples = v.len();
                        for r in v {
                            report.max_ricci_residual_closed = report.max_ricci_residual_closed.max(r.closed);
                            report.max_ricci_residual_fd = report.max_ricci_residual_fd.max(r.fd);
                            report.max_k_fd_error = report.max_k_fd_error.max(r.k_err);
                            pos |= r.k_scaled > FLAT_SCALE;
                            neg |= r.k_scaled < -FLAT_SCALE;
                        }
                    }
                    Err(e) => {
                        report.max_ricci_residual_fd = f64::INFINITY;
                        report.max_k_fd_error = f64::INFINITY;
                        notes.push(format!("resampling failed: {e}"));
                    }
                }
            } else {
                notes.push("window too short to resample".into());
            }
        }
    }
    report.sign_constant = !(pos && neg);
    let checks = [
        ("max_ode_residual", report.max_ode_residual, tol.ode),
        ("max_ricci_residual_closed", report.max_ricci_residual_closed, tol.ricci_closed),
        ("max_ricci_residual_fd", report.max_ricci_residual_fd, tol.ricci_fd),
        ("max_arclength_violation", report.max_arclength_violation, tol.arclength),
        ("max_K_fd_error", report.max_k_fd_error, tol.k_fd),
    ];
    for (name, value, limit) in checks {
        if !(value <= limit) {
            notes.push(format!("{name} = {value:e} exceeds {limit:e}"));
        }
    }
    if !report.sign_constant {
        notes.push("K changes sign".into());
    }
    report.passed = notes.is_empty();
    report.notes = notes;
    report
}

/// Families drawn by [`random_case`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseFamily {
    A0,
    B0Plus,
    B0Minus,
    General,
}

impl CaseFamily {
    pub const ALL: [CaseFamily; 4] = [CaseFamily::A0, CaseFamily::B0Plus, CaseFamily::B0Minus, CaseFamily::General];
}

/// Admissible parameters with a finite window inside the maximal interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomCase {
    pub family: CaseFamily,
    pub params: RicciParams,
    pub window: DomainInterval,
    /// A point of the window, usable as an IVP seed.
    pub center: f64,
}

/// Deterministic stream of cases.
pub fn case_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn signed(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let x = rng.gen_range(lo..hi);
    if rng.gen_bool(0.5) {
        x
    } else {
        -x
    }
}

/// Clips `[center - half, center + half]` to the domain, or takes a window of
/// width `2 half` at the nearest finite end when the center lies outside.
/// Open finite ends are pulled in by 5% of the width.
pub fn window_around(domain: &DomainInterval, center: f64, half: f64) -> DomainInterval {
    let (mut lo, mut hi) = if domain.contains(center) {
        ((center - half).max(domain.lo), (center + half).min(domain.hi))
    } else if center <= domain.lo {
        (domain.lo, (domain.lo + 2.0 * half).min(domain.hi))
    } else {
        ((domain.hi - 2.0 * half).max(domain.lo), domain.hi)
    };
    let width = hi - lo;
    let mut lo_kind = EndpointKind::Truncation;
    let mut hi_kind = EndpointKind::Truncation;
    if lo == domain.lo {
        if domain.lo_closed {
            lo_kind = domain.lo_kind;
        } else {
            lo += 0.05 * width;
        }
    }
    if hi == domain.hi {
        if domain.hi_closed {
            hi_kind = domain.hi_kind;
        } else {
            hi -= 0.05 * width;
        }
    }
    DomainInterval::new(lo, lo_kind, hi, hi_kind)
}

fn draw_a0(rng: &mut ChaCha8Rng) -> (RicciParams, f64) {
    let c = rng.gen_range(-1.0..1.0);
    let n2 = rng.gen_range(0.3f64..2.0).powi(2);
    match rng.gen_range(0..5) {
        0 => {
            let b = rng.gen_range(0.1..1.0);
            (RicciParams::new(0.0, b, c, n2 + c * c / b), -c / b)
        }
        1 => {
            let b = rng.gen_range(1.2..4.0);
            (RicciParams::new(0.0, b, c, n2 + c * c / b), -c / b)
        }
        2 => {
            let b = rng.gen_range(-3.0..-0.2);
            (RicciParams::new(0.0, b, c, n2 + c * c / b), -c / b)
        }
        3 => {
            let b = rng.gen_range(0.2..0.8);
            let branch = if rng.gen_bool(0.5) { Branch::Plus } else { Branch::Minus };
            (RicciParams::new(0.0, b, c, c * c / b - n2).with_branch(branch), -c / b)
        }
        _ => {
            let c = signed(rng, 0.5, 2.0);
            let d = rng.gen_range(-1.0..3.0);
            (RicciParams::new(0.0, 0.0, c, d), (c * c - d) / (2.0 * c))
        }
    }
}

fn draw_b0(rng: &mut ChaCha8Rng, branch: Branch) -> (RicciParams, f64) {
    loop {
        let a = signed(rng, 0.2, 1.5);
        let c = signed(rng, 0.5, 2.0);
        let ok = match branch {
            Branch::Plus => (c < 0.0 && a > 0.0) || (c > 0.0 && a < 1.0),
            Branch::Minus => (c > 0.0 && a < 0.0) || (c < 0.0 && a > -1.0),
        };
        if !ok {
            continue;
        }
        let d = rng.gen_range(-2.0..2.0);
        // a point where sigma (a f + c) > 0, mapped to s through the implicit equation
        let u = 1.0 + c.abs();
        let f = (branch.sign() * u - c) / a;
        if !(f > 0.0) {
            continue;
        }
        let s = (a * f - c * u.ln() - d) / (a * a);
        return (RicciParams::new(a, 0.0, c, d).with_branch(branch), s);
    }
}

fn draw_general(rng: &mut ChaCha8Rng) -> (RicciParams, f64) {
    let a = signed(rng, 0.3, 1.5);
    let b = signed(rng, 0.3, 3.0);
    let c = rng.gen_range(-1.0..1.0);
    let f_star = rng.gen_range(0.5..2.0);
    let v_star = -a * a / b;
    (RicciParams::new(a, b, c, -a * f_star / b), v_star * f_star / a - c / b)
}

/// Relative distance `|v - v_root| / |v_root|` kept from the roots of `rho`.
/// Closer in, `K` carries a relative rounding error above `1e-13` because `v`
/// itself does, and second differences at `h = 1e-4` amplify it by `4/h^2`.
pub const RHO_ROOT_MARGIN: f64 = 0.1;

fn keep_off_rho_roots(gp: &GeneralProfile, mut window: DomainInterval) -> DomainInterval {
    let ((_, e_lo), (_, e_hi)) = gp.s_interval();
    let cut = |e: VEnd| {
        let gap = RHO_ROOT_MARGIN * e.v.abs();
        let v = if (gp.v_star - e.v).abs() > gap {
            e.v + gap.copysign(gp.v_star - e.v)
        } else {
            0.5 * (e.v + gp.v_star)
        };
        gp.s_at_v(v)
    };
    if e_lo.kind != VEndKind::Tangent {
        let s = cut(e_lo);
        if s > window.lo {
            window = DomainInterval::new(s, EndpointKind::Truncation, window.hi, window.hi_kind);
        }
    }
    if e_hi.kind != VEndKind::Tangent {
        let s = cut(e_hi);
        if s < window.hi {
            window = DomainInterval::new(window.lo, window.lo_kind, s, EndpointKind::Truncation);
        }
    }
    window
}

/// Draws one case of the family; retries until classification succeeds and
/// the window has positive width.
pub fn random_case(family: CaseFamily, rng: &mut ChaCha8Rng) -> RandomCase {
    loop {
        let (params, center) = match family {
            CaseFamily::A0 => draw_a0(rng),
            CaseFamily::B0Plus => draw_b0(rng, Branch::Plus),
            CaseFamily::B0Minus => draw_b0(rng, Branch::Minus),
            CaseFamily::General => draw_general(rng),
        };
        let Ok(report) = classify(&params) else { continue };
        let mut window = window_around(&report.interval, center, 5.0);
        if let Ok(ProfileModel::General(gp)) = ProfileModel::new(&params) {
            window = keep_off_rho_roots(&gp, window);
        }
        if !(window.hi - window.lo > 1e-2) {
            continue;
        }
        let center = if window.lo < center && center < window.hi {
            center
        } else {
            0.5 * (window.lo + window.hi)
        };
        return RandomCase {
            family,
            params,
            window,
            center,
        };
    }
}
