//! Height function, sampled profile curves, surface meshes and export.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{classify, ClassificationReport, DomainInterval, EndpointKind};
use crate::curvature::{gauss_k, gauss_k_derivs, mean_h, normalized_residual, ricci_residual};
use crate::error::{Result, RicciError};
use crate::freeboundary::FreeBoundarySolution;
use crate::numeric::quad::{integrate, QuadTol};
use crate::oracle::ValidationReport;
use crate::params::RicciParams;
use crate::profile::ProfileModel;

/// Absolute accuracy of each height quadrature.
pub const HEIGHT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub s: f64,
    pub f: f64,
    pub fp: f64,
    pub g: f64,
    #[serde(rename = "K")]
    pub k: f64,
    /// `None` at a horizontal tangent.
    #[serde(rename = "H")]
    pub h: Option<f64>,
    /// Normalized closed-form Ricci residual.
    pub residual: f64,
}

impl ProfileSample {
    pub fn at(params: &RicciParams, s: f64, f: f64, g: f64) -> Self {
        let fp = params.slope(s, f).clamp(-1.0, 1.0);
        let k = gauss_k(params, s, f);
        let (kp, kpp) = gauss_k_derivs(params, s, f, k);
        let raw = ricci_residual(k, kp, kpp, f, fp);
        ProfileSample {
            s,
            f,
            fp,
            g,
            k,
            h: mean_h(params, s, f).ok(),
            residual: normalized_residual(raw, k, kp, kpp),
        }
    }
}

/// Samples of a generating curve `(f(s), 0, g(s))` by arc length, with
/// `g(s0_anchor) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub params: RicciParams,
    pub samples: Vec<ProfileSample>,
    pub s0_anchor: f64,
}

impl ProfileCurve {
    /// Builds the curve from `(s, f, g)` triples in increasing `s`.
    pub fn from_points(params: &RicciParams, s0_anchor: f64, pts: Vec<(f64, f64, f64)>) -> Self {
        ProfileCurve {
            params: *params,
            samples: pts
                .into_iter()
                .map(|(s, f, g)| ProfileSample::at(params, s, f, g))
                .collect(),
            s0_anchor,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn s_range(&self) -> Option<(f64, f64)> {
        Some((self.samples.first()?.s, self.samples.last()?.s))
    }
}

fn integrand(params: &RicciParams, s: f64, f: f64) -> f64 {
    let r = params.rhs(s, f);
    ((f * f - r * r).max(0.0)).sqrt() / f
}

/// `int_x^y sqrt(f^2 - (a f + b s + c)^2) / f ds` for `x <= y` inside `domain`.
/// Near a `|f'| = 1` endpoint the integral is taken in `u` with
/// `s = endpoint +- u^2`, which removes the square-root behaviour there.
fn height_piece<F>(params: &RicciParams, radius: &F, domain: &DomainInterval, x: f64, y: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + ?Sized,
{
    if x == y {
        return Ok(0.0);
    }
    let tol = QuadTol::abs(0.5 * HEIGHT_TOL);
    let mut failure = None;
    let mut eval = |s: f64| match radius(s) {
        Ok(f) => integrand(params, s, f),
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let lo_root = domain.lo_kind == EndpointKind::PolynomialRoot;
    let hi_root = domain.hi_kind == EndpointKind::PolynomialRoot;
    let from_lo = |eval: &mut dyn FnMut(f64) -> f64, x: f64, y: f64| {
        let e = domain.lo;
        let (u0, u1) = ((x - e).max(0.0).sqrt(), (y - e).max(0.0).sqrt());
        integrate(|u| 2.0 * u * eval(e + u * u), u0, u1, tol).map(|q| q.value)
    };
    let from_hi = |eval: &mut dyn FnMut(f64) -> f64, x: f64, y: f64| {
        let e = domain.hi;
        let (u0, u1) = ((e - y).max(0.0).sqrt(), (e - x).max(0.0).sqrt());
        integrate(|u| 2.0 * u * eval(e - u * u), u0, u1, tol).map(|q| q.value)
    };
    let total = match (lo_root, hi_root) {
        (false, false) => integrate(&mut eval, x, y, tol)?.value,
        (true, false) => from_lo(&mut eval, x, y)?,
        (false, true) => from_hi(&mut eval, x, y)?,
        (true, true) => {
            let mid = 0.5 * (x + y);
            from_lo(&mut eval, x, mid)? + from_hi(&mut eval, mid, y)?
        }
    };
    match failure {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// `g(s) - g(s0)` for the profile of `params`, whose maximal interval is
/// `domain`, using `radius` as the evaluator of `f`.
pub fn height_g_with<F>(params: &RicciParams, radius: &F, domain: &DomainInterval, s0: f64, s: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + ?Sized,
{
    let (x, y) = if s0 <= s { (s0, s) } else { (s, s0) };
    if !domain.contains_range(x, y) {
        return Err(RicciError::OutsideDomain {
            s: if domain.contains(x) { y } else { x },
            lo: domain.lo,
            hi: domain.hi,
        });
    }
    let v = height_piece(params, radius, domain, x, y)?;
    Ok(if s0 <= s { v } else { -v })
}

/// `g(s)` with `g(s0) = 0` for the closed-form profile of `params`.
pub fn height_g(params: &RicciParams, s0: f64, s: f64) -> Result<f64> {
    let model = ProfileModel::new(params)?;
    let report = classify(params)?;
    height_g_with(params, &|x| model.radius(x), &report.interval, s0, s)
}

/// `n` cosine-spaced samples on the finite `window`, which must lie inside the
/// maximal interval. `g` is anchored at `0` when the window contains it, else
/// at the window midpoint.
pub fn sample_profile(params: &RicciParams, window: &DomainInterval, n: usize) -> Result<ProfileCurve> {
    let report = classify(params)?;
    let model = ProfileModel::new(params)?;
    sample_with(params, &report, &|s| model.radius(s), window, n)
}

pub(crate) fn sample_with<F>(
    params: &RicciParams,
    report: &ClassificationReport,
    radius: &F,
    window: &DomainInterval,
    n: usize,
) -> Result<ProfileCurve>
where
    F: Fn(f64) -> Result<f64> + Sync + ?Sized,
{
    if n < 2 {
        return Err(RicciError::TooFewSamples { needed: 2, got: n });
    }
    let (lo, hi) = (window.lo, window.hi);
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(RicciError::BadParameters(format!(
            "sampling window [{lo}, {hi}] must be finite and nonempty"
        )));
    }
    let domain = &report.interval;
    if !domain.contains_range(lo, hi) {
        return Err(RicciError::OutsideDomain {
            s: if domain.contains(lo) { hi } else { lo },
            lo: domain.lo,
            hi: domain.hi,
        });
    }
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let grid: Vec<f64> = (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                mid - half * (std::f64::consts::PI * i as f64 / (n - 1) as f64).cos()
            }
        })
        .collect();
    let anchor = if lo <= 0.0 && 0.0 <= hi { 0.0 } else { mid };
    let f: Vec<f64> = grid.par_iter().map(|&s| radius(s)).collect::<Result<_>>()?;
    let steps: Vec<f64> = grid
        .par_windows(2)
        .map(|w| height_piece(params, radius, domain, w[0], w[1]))
        .collect::<Result<_>>()?;
    // cumulative height from the first sample, then shift to the anchor
    let mut cum = Vec::with_capacity(n);
    cum.push(0.0);
    for st in &steps {
        cum.push(cum.last().unwrap() + st);
    }
    let k = grid.partition_point(|&s| s <= anchor).saturating_sub(1);
    let g_anchor = cum[k] + height_piece(params, radius, domain, grid[k], anchor)?;
    let pts = grid
        .iter()
        .zip(&f)
        .zip(&cum)
        .map(|((&s, &f), &g)| (s, f, g - g_anchor))
        .collect();
    Ok(ProfileCurve::from_points(params, anchor, pts))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMesh {
    pub vertices: Vec<[f64; 3]>,
    /// 0-based vertex indices, counter-clockwise seen from outside.
    pub quads: Vec<[usize; 4]>,
    pub n_profile: usize,
    pub n_theta: usize,
}

/// Vertex `(i, j)` is `(f_i cos theta_j, f_i sin theta_j, g_i)` with
/// `theta_j = 2 pi j / n_theta`; faces wrap around the seam.
pub fn build_mesh(profile: &ProfileCurve, n_theta: usize) -> Result<SurfaceMesh> {
    if n_theta < 3 {
        return Err(RicciError::BadParameters(format!("n_theta = {n_theta} < 3")));
    }
    let n = profile.samples.len();
    let mut vertices = Vec::with_capacity(n * n_theta);
    for smp in &profile.samples {
        for j in 0..n_theta {
            let th = std::f64::consts::TAU * j as f64 / n_theta as f64;
            vertices.push([smp.f * th.cos(), smp.f * th.sin(), smp.g]);
        }
    }
    let mut quads = Vec::with_capacity(n.saturating_sub(1) * n_theta);
    for i in 0..n.saturating_sub(1) {
        for j in 0..n_theta {
            let jn = (j + 1) % n_theta;
            quads.push([
                i * n_theta + j,
                i * n_theta + jn,
                (i + 1) * n_theta + jn,
                (i + 1) * n_theta + j,
            ]);
        }
    }
    Ok(SurfaceMesh {
        vertices,
        quads,
        n_profile: n,
        n_theta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Obj,
    Csv,
    Json,
}

impl FromStr for ExportFormat {
    type Err = RicciError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(ExportFormat::Obj),
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            other => Err(RicciError::UnsupportedFormat {
                format: other.to_string(),
                item: "any".into(),
            }),
        }
    }
}

/// Anything that can be written out.
#[derive(Debug, Clone, Copy)]
pub enum Exportable<'a> {
    Mesh(&'a SurfaceMesh),
    Profile(&'a ProfileCurve),
    Report(&'a ClassificationReport),
    Validation(&'a ValidationReport),
    Sweep(&'a [FreeBoundarySolution]),
}

impl Exportable<'_> {
    fn name(&self) -> &'static str {
        match self {
            Exportable::Mesh(_) => "mesh",
            Exportable::Profile(_) => "profile",
            Exportable::Report(_) => "report",
            Exportable::Validation(_) => "validation report",
            Exportable::Sweep(_) => "sweep",
        }
    }
}

/// Shortest round-trip decimal form; infinities as `inf` / `-inf`.
pub fn fmt_real(x: f64) -> String {
    format!("{x:?}")
}

fn json<T: Serialize + ?Sized>(item: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(item).map_err(|e| RicciError::Numerical(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

pub fn export(item: Exportable<'_>, format: ExportFormat) -> Result<Vec<u8>> {
    match (item, format) {
        (Exportable::Mesh(m), ExportFormat::Obj) => Ok(mesh_obj(m).into_bytes()),
        (Exportable::Mesh(m), ExportFormat::Json) => json(m),
        (Exportable::Profile(p), ExportFormat::Csv) => Ok(profile_csv(p).into_bytes()),
        (Exportable::Profile(p), ExportFormat::Json) => json(p),
        (Exportable::Report(r), ExportFormat::Json) => json(r),
        (Exportable::Validation(r), ExportFormat::Json) => json(r),
        (Exportable::Sweep(s), ExportFormat::Csv) => Ok(crate::freeboundary::sweep_csv(s).into_bytes()),
        (Exportable::Sweep(s), ExportFormat::Json) => json(s),
        (item, format) => Err(RicciError::UnsupportedFormat {
            format: format!("{format:?}").to_ascii_lowercase(),
            item: item.name().into(),
        }),
    }
}

fn mesh_obj(m: &SurfaceMesh) -> String {
    let mut out = String::with_capacity(m.vertices.len() * 48);
    for v in &m.vertices {
        let _ = writeln!(out, "v {} {} {}", fmt_real(v[0]), fmt_real(v[1]), fmt_real(v[2]));
    }
    for q in &m.quads {
        let _ = writeln!(out, "f {} {} {} {}", q[0] + 1, q[1] + 1, q[2] + 1, q[3] + 1);
    }
    out
}

/// Header of the profile CSV.
pub const PROFILE_CSV_HEADER: &str = "s,f,fp,g,K,H,residual";

fn profile_csv(p: &ProfileCurve) -> String {
    let mut out = String::with_capacity(p.samples.len() * 128);
    out.push_str(PROFILE_CSV_HEADER);
    out.push('\n');
    for x in &p.samples {
        let h = x.h.map_or_else(|| "inf".to_string(), fmt_real);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_real(x.s),
            fmt_real(x.f),
            fmt_real(x.fp),
            fmt_real(x.g),
            fmt_real(x.k),
            h,
            fmt_real(x.residual)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64, b: f64, c: f64, d: f64) -> RicciParams {
        RicciParams::new(a, b, c, d)
    }

    #[test]
    fn height_examples() {
        let cat = p(0.0, 1.0, 0.0, 1.0);
        assert!((height_g(&cat, 0.0, 1.0).unwrap() - 0.881373587019543).abs() < 1e-10);
        assert!((height_g(&cat, 0.0, -1.0).unwrap() + 0.881373587019543).abs() < 1e-10);
        let cyl = p(0.0, 0.0, 0.0, 4.0);
        assert!((height_g(&cyl, 0.0, 3.0).unwrap() - 3.0).abs() < 1e-12);
        let plane = p(0.0, 1.0, 1.0, 1.0);
        assert_eq!(height_g(&plane, 0.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn height_up_to_tangent_endpoint() {
        // b = 2: f = sqrt(2 s^2 + 1) on [-1/sqrt 2, 1/sqrt 2]; compare with a
        // fine midpoint rule on the u-substituted integrand
        let params = p(0.0, 2.0, 0.0, 1.0);
        let e = 0.5f64.sqrt();
        let g = height_g(&params, 0.0, e).unwrap();
        let n = 200_000;
        let umax = e.sqrt();
        let mut acc = 0.0;
        for i in 0..n {
            let u = (i as f64 + 0.5) * umax / n as f64;
            let s = e - u * u;
            let f = (2.0 * s * s + 1.0f64).sqrt();
            acc += 2.0 * u * integrand(&params, s, f) * umax / n as f64;
        }
        assert!((g - acc).abs() < 1e-9);
        assert!(height_g(&params, 0.0, 0.8).is_err());
    }

    #[test]
    fn catenoid_sampling_symmetry() {
        let c = sample_profile(&p(0.0, 1.0, 0.0, 1.0), &DomainInterval::window(-2.0, 2.0), 5).unwrap();
        assert_eq!(c.s0_anchor, 0.0);
        let s: Vec<f64> = c.samples.iter().map(|x| x.s).collect();
        assert_eq!(s[0], -2.0);
        assert!(s[2].abs() < 1e-15);
        assert!((s[1] + s[3]).abs() < 1e-15);
        for i in 0..5 {
            let (a, b) = (&c.samples[i], &c.samples[4 - i]);
            assert!((a.f - b.f).abs() < 1e-14);
            assert!((a.g + b.g).abs() < 1e-10);
            assert!((a.g - a.s.asinh()).abs() < 1e-10);
        }
    }

    #[test]
    fn funnel_sampling() {
        let c = sample_profile(&p(1.0, 0.0, -1.0, 0.0), &DomainInterval::window(-10.0, 2.0), 40).unwrap();
        assert_eq!(c.s0_anchor, 0.0);
        assert!(c.samples.windows(2).all(|w| w[0].f < w[1].f && w[0].g < w[1].g));
        assert!(c.samples.iter().all(|x| x.f > 1.0));
        assert!(c.samples[0].g < -9.0);
    }

    #[test]
    fn two_sample_profile() {
        let c = sample_profile(&p(0.0, 0.0, 0.0, 1.0), &DomainInterval::window(0.0, 1.0), 2).unwrap();
        assert_eq!(c.len(), 2);
        assert!(sample_profile(&p(0.0, 0.0, 0.0, 1.0), &DomainInterval::window(0.0, 1.0), 1).is_err());
    }

    #[test]
    fn cylinder_mesh_and_obj() {
        let c = sample_profile(&p(0.0, 0.0, 0.0, 1.0), &DomainInterval::window(0.0, 1.0), 2).unwrap();
        let m = build_mesh(&c, 4).unwrap();
        assert_eq!(m.vertices.len(), 8);
        assert_eq!(m.quads.len(), 4);
        assert_eq!(m.vertices[0], [1.0, 0.0, 0.0]);
        assert!((m.vertices[5][2] - 1.0).abs() < 1e-12);
        let obj = String::from_utf8(export(Exportable::Mesh(&m), ExportFormat::Obj).unwrap()).unwrap();
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 8);
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 4);
        // seam face joins column 3 back to column 0
        assert!(obj.contains("f 4 1 5 8"));
        assert!(build_mesh(&c, 2).is_err());
    }

    #[test]
    fn catenoid_neck_vertex() {
        let c = sample_profile(&p(0.0, 1.0, 0.0, 1.0), &DomainInterval::window(-1.0, 1.0), 3).unwrap();
        let m = build_mesh(&c, 8).unwrap();
        let v = m.vertices[8];
        assert!((v[0] - 1.0).abs() < 1e-15 && v[1] == 0.0 && v[2].abs() < 1e-15);
    }

    #[test]
    fn profile_csv_shape() {
        let params = p(0.0, 2.0, 0.0, 1.0);
        let w = classify(&params).unwrap().interval;
        let c = sample_profile(&params, &w, 11).unwrap();
        let csv = String::from_utf8(export(Exportable::Profile(&c), ExportFormat::Csv).unwrap()).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], PROFILE_CSV_HEADER);
        assert_eq!(lines.len(), 12);
        let inf_rows: Vec<usize> = (1..lines.len())
            .filter(|&i| lines[i].split(',').nth(5) == Some("inf"))
            .collect();
        assert_eq!(inf_rows, vec![1, 11]);
        // round trip of a value
        let s1: f64 = lines[2].split(',').next().unwrap().parse().unwrap();
        assert_eq!(s1, c.samples[1].s);
    }

    #[test]
    fn unsupported_formats() {
        let c = sample_profile(&p(0.0, 0.0, 0.0, 1.0), &DomainInterval::window(0.0, 1.0), 2).unwrap();
        assert!(matches!(
            export(Exportable::Profile(&c), ExportFormat::Obj),
            Err(RicciError::UnsupportedFormat { .. })
        ));
        assert!("stl".parse::<ExportFormat>().is_err());
    }
}
