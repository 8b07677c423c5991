//! The free-boundary family in the unit ball: for `0 < b <= 1` the profile
//! `f(t) = sqrt(b) sqrt(t^2 + rho(1 - rho))` on `[-rho, rho]`, with `rho` fixed by
//! `b rho + g(rho)^2 = 1`. `b = 1` is the critical catenoid and `b -> 0` the
//! vertical geodesic.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::gauss_k;
use crate::error::{Result, RicciError};
use crate::geometry::{fmt_real, ProfileCurve, SurfaceMesh};
use crate::numeric::quad::{integrate, QuadTol};
use crate::numeric::roots::{brent, RootTol};
use crate::params::RicciParams;

/// `|Phi(rho)|` accepted at the root.
pub const BOUNDARY_TOL: f64 = 1e-11;
/// Accepted conormal residuals.
pub const CONORMAL_TOL: f64 = 1e-8;

const INNER_QUAD: QuadTol = QuadTol {
    abs: 1e-15,
    rel: 1e-14,
    max_intervals: 4000,
};

/// Which root of `b^2 rho^2 - b^2 rho + b d - c^2 = 0` (roots `rho` and
/// `1 - rho` for `d = b rho (1 - rho)`, `c = 0`) the solution matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadraticRoot {
    /// The smaller root.
    Rho1,
    /// The larger root.
    Rho2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeBoundarySolution {
    pub b: f64,
    pub rho: f64,
    /// `sqrt(b) sqrt(rho (1 - rho))`.
    pub neck_radius: f64,
    /// `|b rho + g(rho)^2 - 1|`.
    pub residual_boundary: f64,
    /// `|f'(rho) - f(rho)|`.
    pub residual_conormal_f: f64,
    /// `|g'(rho) - g(rho)|`.
    pub residual_conormal_g: f64,
    pub matched_root: QuadraticRoot,
    /// `b = 0`: the vertical geodesic, recorded but not solved.
    pub geodesic: bool,
}

impl FreeBoundarySolution {
    /// `rho (1 - rho)`.
    pub fn r2(&self) -> f64 {
        self.rho * (1.0 - self.rho)
    }

    /// The surface as a member of the `a = 0` family with `s = t`.
    pub fn params(&self) -> RicciParams {
        RicciParams::new(0.0, self.b, 0.0, self.b * self.r2())
    }

    pub fn f_hat(&self, t: f64) -> f64 {
        self.b.sqrt() * (t * t + self.r2()).sqrt()
    }

    pub fn f_hat_prime(&self, t: f64) -> f64 {
        self.b.sqrt() * t / (t * t + self.r2()).sqrt()
    }

    pub fn g_hat(&self, t: f64) -> Result<f64> {
        g_hat(self.b, self.rho, t)
    }

    /// `sqrt(((1 - b) t^2 + r^2) / (t^2 + r^2))`.
    pub fn g_hat_prime(&self, t: f64) -> f64 {
        let r2 = self.r2();
        (((1.0 - self.b) * t * t + r2) / (t * t + r2)).sqrt()
    }
}

fn check_b(b: f64) -> Result<()> {
    if b > 0.0 && b <= 1.0 {
        Ok(())
    } else {
        Err(RicciError::BadParameters(format!("b = {b} is outside (0, 1]")))
    }
}

/// `r int_0^{asinh(t/r)} sqrt(1 + (1 - b) sinh^2 u) du`, which is
/// `int_0^t sqrt(((1-b) tau^2 + r^2)/(tau^2 + r^2)) dtau` after `tau = r sinh u`.
fn g_hat_r(b: f64, r: f64, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let upper = (t / r).asinh();
    if b == 1.0 {
        return Ok(r * upper);
    }
    let k = 1.0 - b;
    let q = integrate(|u| (1.0 + k * u.sinh().powi(2)).sqrt(), 0.0, upper, INNER_QUAD)?;
    Ok(r * q.value)
}

/// `int_0^t sqrt(((1-b) tau^2 + rho(1-rho)) / (tau^2 + rho(1-rho))) dtau`.
pub fn g_hat(b: f64, rho: f64, t: f64) -> Result<f64> {
    check_b(b)?;
    if !(rho > 0.0 && rho < 1.0) {
        return Err(RicciError::BadParameters(format!("rho = {rho} is outside (0, 1)")));
    }
    if !(t.abs() <= rho) {
        return Err(RicciError::BadParameters(format!("|t| = {} exceeds rho = {rho}", t.abs())));
    }
    g_hat_r(b, (rho * (1.0 - rho)).sqrt(), t)
}

/// `Phi` at `rho = 1 - eps`, with `r^2 = rho eps` formed without cancellation.
fn phi_eps(b: f64, eps: f64) -> Result<f64> {
    let rho = 1.0 - eps;
    let g = g_hat_r(b, (rho * eps).sqrt(), rho)?;
    Ok(b * rho + g * g - 1.0)
}

/// Solves `b rho + g(rho)^2 = 1` on `(0, 1)` and checks the conormal conditions.
pub fn solve_rho(b: f64) -> Result<FreeBoundarySolution> {
    check_b(b)?;
    // Phi -> -1 as rho -> 0 and Phi -> 0+ as rho -> 1; search in y = ln(1 - rho)
    let phi_y = |y: f64| phi_eps(b, y.exp()).unwrap_or(f64::NAN);
    let y_lo = (1.0f64 - 1e-6).ln();
    if !(phi_y(y_lo) < 0.0) {
        return Err(RicciError::NoRoot { b });
    }
    let mut y_hi = None;
    for k in 1..=52 {
        let y = -(k as f64) * std::f64::consts::LN_2;
        if phi_y(y) > 0.0 {
            y_hi = Some(y);
            break;
        }
    }
    let y_hi = y_hi.ok_or(RicciError::NoRoot { b })?;
    let tol = RootTol {
        xtol_abs: 1e-300,
        ..RootTol::default()
    };
    let y = brent(phi_y, y_hi, y_lo, tol)?;
    let eps = y.exp();
    let rho = 1.0 - eps;
    let mut sol = FreeBoundarySolution {
        b,
        rho,
        neck_radius: b.sqrt() * (rho * eps).sqrt(),
        residual_boundary: 0.0,
        residual_conormal_f: 0.0,
        residual_conormal_g: 0.0,
        matched_root: if rho >= 0.5 { QuadraticRoot::Rho2 } else { QuadraticRoot::Rho1 },
        geodesic: false,
    };
    let g = sol.g_hat(rho)?;
    sol.residual_boundary = (b * rho + g * g - 1.0).abs();
    sol.residual_conormal_f = (sol.f_hat_prime(rho) - sol.f_hat(rho)).abs();
    sol.residual_conormal_g = (sol.g_hat_prime(rho) - g).abs();
    if sol.residual_boundary > BOUNDARY_TOL {
        return Err(RicciError::Numerical(format!(
            "boundary residual {:e} above {BOUNDARY_TOL:e} for b = {b}",
            sol.residual_boundary
        )));
    }
    if sol.residual_conormal_f > CONORMAL_TOL || sol.residual_conormal_g > CONORMAL_TOL {
        return Err(RicciError::Numerical(format!(
            "conormal residuals ({:e}, {:e}) above {CONORMAL_TOL:e} for b = {b}",
            sol.residual_conormal_f, sol.residual_conormal_g
        )));
    }
    Ok(sol)
}

/// `(1/sqrt(rho)) sinh(1/sqrt(rho)) - 1/sqrt(1 - rho)`.
pub fn critical_catenoid_residual(rho: f64) -> f64 {
    let x = 1.0 / rho.sqrt();
    x * x.sinh() - 1.0 / (1.0 - rho).sqrt()
}

/// Root of [`critical_catenoid_residual`] on `(0, 1)`.
pub fn critical_catenoid_rho() -> f64 {
    brent(critical_catenoid_residual, 0.05, 0.99, RootTol::default())
        .expect("the sinh equation changes sign on [0.05, 0.99]")
}

/// The `b = 0` record: the vertical geodesic with `rho = 1`.
pub fn geodesic_marker() -> FreeBoundarySolution {
    FreeBoundarySolution {
        b: 0.0,
        rho: 1.0,
        neck_radius: 0.0,
        residual_boundary: 0.0,
        residual_conormal_f: 0.0,
        residual_conormal_g: 0.0,
        matched_root: QuadraticRoot::Rho2,
        geodesic: true,
    }
}

/// Solutions in input order; `b = 0` yields [`geodesic_marker`].
pub fn family_sweep(b_values: &[f64]) -> Result<Vec<FreeBoundarySolution>> {
    b_values
        .par_iter()
        .map(|&b| if b == 0.0 { Ok(geodesic_marker()) } else { solve_rho(b) })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussBonnet {
    /// `2 pi int_{-rho}^{rho} K f dt`.
    pub area_integral: f64,
    /// `4 pi f(rho)`.
    pub boundary_length: f64,
}

impl GaussBonnet {
    pub fn relative_defect(&self) -> f64 {
        (self.area_integral + self.boundary_length).abs() / self.boundary_length
    }
}

/// Integrates the curvature over the surface on `n` equal pieces of
/// `[-rho, rho]`, each refined adaptively.
pub fn gauss_bonnet_audit(sol: &FreeBoundarySolution, n: usize) -> Result<GaussBonnet> {
    if sol.geodesic {
        return Err(RicciError::BadParameters("the geodesic has no area".into()));
    }
    let n = n.max(1);
    let params = sol.params();
    let h = 2.0 * sol.rho / n as f64;
    let tol = QuadTol {
        abs: 1e-14,
        rel: 1e-13,
        max_intervals: 4000,
    };
    let mut total = 0.0;
    for i in 0..n {
        let (x, y) = (-sol.rho + i as f64 * h, -sol.rho + (i + 1) as f64 * h);
        let q = integrate(
            |t| {
                let f = sol.f_hat(t);
                gauss_k(&params, t, f) * f
            },
            x,
            y.min(sol.rho),
            tol,
        )?;
        total += q.value;
    }
    Ok(GaussBonnet {
        area_integral: std::f64::consts::TAU * total,
        boundary_length: 2.0 * std::f64::consts::TAU * sol.f_hat(sol.rho),
    })
}

/// `n` equally spaced samples on `[-rho, rho]` with `g = g_hat`.
pub fn free_boundary_curve(sol: &FreeBoundarySolution, n: usize) -> Result<ProfileCurve> {
    if sol.geodesic {
        return Err(RicciError::BadParameters("the geodesic is not a surface".into()));
    }
    if n < 2 {
        return Err(RicciError::TooFewSamples { needed: 2, got: n });
    }
    let pts = (0..n)
        .map(|i| {
            let t = if i == n - 1 {
                sol.rho
            } else {
                -sol.rho + 2.0 * sol.rho * i as f64 / (n - 1) as f64
            };
            Ok((t, sol.f_hat(t), sol.g_hat(t)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProfileCurve::from_points(&sol.params(), 0.0, pts))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCheck {
    /// `max | |X| - 1 |` over boundary vertices.
    pub max_norm_error: f64,
    /// `max |nu - X|` with `nu` the exterior conormal.
    pub max_conormal_error: f64,
    pub vertices: usize,
}

/// Checks the first and last vertex rings of a mesh of the solution, which
/// sit at `t = -rho` and `t = rho`.
pub fn boundary_check(sol: &FreeBoundarySolution, mesh: &SurfaceMesh) -> BoundaryCheck {
    let nt = mesh.n_theta;
    let last = mesh.n_profile.saturating_sub(1);
    let mut out = BoundaryCheck {
        max_norm_error: 0.0,
        max_conormal_error: 0.0,
        vertices: 0,
    };
    for (row, t, sigma) in [(0, -sol.rho, -1.0), (last, sol.rho, 1.0)] {
        for x in &mesh.vertices[row * nt..(row + 1) * nt] {
            let norm = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            let rad = x[0].hypot(x[1]);
            let fp = sol.f_hat_prime(t);
            let nu = [
                sigma * fp * x[0] / rad,
                sigma * fp * x[1] / rad,
                sigma * sol.g_hat_prime(t),
            ];
            let dev = ((nu[0] - x[0]).powi(2) + (nu[1] - x[1]).powi(2) + (nu[2] - x[2]).powi(2)).sqrt();
            out.max_norm_error = out.max_norm_error.max((norm - 1.0).abs());
            out.max_conormal_error = out.max_conormal_error.max(dev);
            out.vertices += 1;
        }
    }
    out
}

pub const SWEEP_CSV_HEADER: &str =
    "b,rho,neck_radius,residual_boundary,residual_conormal_f,residual_conormal_g,geodesic";

pub fn sweep_csv(sols: &[FreeBoundarySolution]) -> String {
    let mut out = String::new();
    out.push_str(SWEEP_CSV_HEADER);
    out.push('\n');
    for s in sols {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_real(s.b),
            fmt_real(s.rho),
            fmt_real(s.neck_radius),
            fmt_real(s.residual_boundary),
            fmt_real(s.residual_conormal_f),
            fmt_real(s.residual_conormal_g),
            s.geodesic
        );
    }
    out
}
