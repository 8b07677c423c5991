use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;
use ricci_rot::classify::EndpointKind;
use ricci_rot::freeboundary::{free_boundary_curve, gauss_bonnet_audit, GaussBonnet};
use ricci_rot::geometry::fmt_real;
use ricci_rot::oracle::{case_rng, random_case, validate_curve_with, CaseFamily, ValidationTolerances};
use ricci_rot::params::{in_omega, omega_region};
use ricci_rot::{
    build_mesh, classify, export, family_sweep, sample_profile, DomainInterval, ExportFormat, Exportable,
    FreeBoundarySolution, ProfileCurve, RicciParams, ValidationReport,
};
use serde::Serialize;

use crate::config::JobConfig;
use crate::profile_io::{read_profile_csv, read_sidecar, write_sidecar};
use crate::{Cli, Command, Failure, ParamArgs, WindowArgs};

const PROFILE_SAMPLES: usize = 201;
const MESH_SAMPLES: usize = 101;
const MESH_THETA: usize = 64;
const FREE_BOUNDARY_SAMPLES: usize = 201;
const FREE_BOUNDARY_THETA: usize = 96;
const GAUSS_BONNET_PANELS: usize = 16;
const RANDOM_SAMPLES: usize = 201;
/// Window length used where the classified bound is infinite.
const DEFAULT_SPAN: f64 = 10.0;
/// Relative inset applied at open finite ends, where the profile cannot be evaluated.
const OPEN_END_INSET: f64 = 1e-3;

pub fn dispatch(cli: &Cli, cfg: &JobConfig) -> Result<(), Failure> {
    match &cli.command {
        Command::Classify { params } => cmd_classify(cfg, params),
        Command::Profile { params, window, out } => cmd_profile(cli.json, cfg, params, window, out.as_deref()),
        Command::Mesh {
            params,
            window,
            n_theta,
            out,
        } => cmd_mesh(cli.json, cfg, params, window, *n_theta, out.as_deref()),
        Command::Freeboundary {
            b,
            sweep,
            audit,
            mesh_out,
            out,
            n,
            n_theta,
        } => {
            let bs = match (sweep, b.or(cfg.b)) {
                (Some(list), _) => list.clone(),
                (None, Some(b)) => vec![b],
                (None, None) => return Err(Failure::usage("freeboundary needs --b or --sweep")),
            };
            let opts = FreeBoundaryOpts {
                audit: *audit,
                mesh_out: mesh_out.as_deref(),
                out: out.as_deref(),
                n: n.or(cfg.n).unwrap_or(FREE_BOUNDARY_SAMPLES),
                n_theta: n_theta.or(cfg.n_theta).unwrap_or(FREE_BOUNDARY_THETA),
            };
            cmd_freeboundary(cli.json, &bs, &opts)
        }
        Command::Validate {
            input,
            random,
            seed,
            resample,
            params,
            window,
        } => {
            let tol = cfg.tolerances.resolve().map_err(|e| Failure::usage(e.to_string()))?;
            if let Some(count) = random {
                let seed = seed.or(cfg.seed).unwrap_or(0);
                let n = window.n.or(cfg.n).unwrap_or(RANDOM_SAMPLES);
                cmd_validate_random(*count, seed, n, resample.unwrap_or(n), &tol)
            } else if let Some(path) = input {
                cmd_validate_csv(path, *resample, &tol)
            } else {
                cmd_validate_params(cfg, params, window, *resample, &tol)
            }
        }
        Command::Omega {
            params,
            grid,
            s_range,
            x_range,
            out,
        } => cmd_omega(cli.json, cfg, params, *grid, s_range, x_range, out.as_deref()),
    }
}

fn required(flag: Option<f64>, file: Option<f64>, name: &str) -> Result<f64, Failure> {
    flag.or(file)
        .ok_or_else(|| Failure::usage(format!("missing --{name} (or key '{name}' in the config file)")))
}

/// Resolves `(a, b, c)`, reporting an inadmissible triple before asking for `d`.
fn resolve_params(cfg: &JobConfig, p: &ParamArgs) -> Result<RicciParams, Failure> {
    let a = required(p.a, cfg.a, "a")?;
    let b = required(p.b, cfg.b, "b")?;
    let c = required(p.c, cfg.c, "c")?;
    if let Some(set) = ricci_rot::params::excluded_set(a, b, c) {
        return Err(ricci_rot::RicciError::Inadmissible { a, b, c, set }.into());
    }
    let d = required(p.d, cfg.d, "d")?;
    let branch = p.branch.or(cfg.branch).unwrap_or_default();
    Ok(RicciParams::new(a, b, c, d).with_branch(branch))
}

/// Sampling window inside the classified bound `dom`. Missing ends default to
/// the bound itself, or to a span of `DEFAULT_SPAN` where the bound is infinite.
fn resolve_window(
    dom: &DomainInterval,
    lo: Option<f64>,
    hi: Option<f64>,
    force: bool,
) -> Result<DomainInterval, Failure> {
    let finite = |x: f64| x.is_finite().then_some(x);
    let (user_lo, user_hi) = (lo.is_some(), hi.is_some());
    let (lo, hi) = match (lo.or(finite(dom.lo)), hi.or(finite(dom.hi))) {
        (Some(l), Some(h)) => (l, h),
        (Some(l), None) => (l, l + DEFAULT_SPAN),
        (None, Some(h)) => (h - DEFAULT_SPAN, h),
        (None, None) => (-0.5 * DEFAULT_SPAN, 0.5 * DEFAULT_SPAN),
    };
    if !(lo < hi) {
        return Err(Failure {
            code: crate::EXIT_DOMAIN,
            message: format!("empty sampling window [{lo}, {hi}]"),
        });
    }
    let outside = |x: f64, user: bool| user && !dom.contains(x);
    let (lo, hi) = if outside(lo, user_lo) || outside(hi, user_hi) {
        if !force {
            return Err(Failure {
                code: crate::EXIT_DOMAIN,
                message: format!(
                    "window [{lo}, {hi}] exceeds the maximal interval [{}, {}]; pass --force to clip it",
                    dom.lo, dom.hi
                ),
            });
        }
        let (l, h) = (lo.max(dom.lo), hi.min(dom.hi));
        if !(l < h) {
            return Err(Failure {
                code: crate::EXIT_DOMAIN,
                message: format!("window [{lo}, {hi}] does not meet the maximal interval [{}, {}]", dom.lo, dom.hi),
            });
        }
        (l, h)
    } else {
        (lo, hi)
    };
    let width = hi - lo;
    let (mut lo, mut hi) = (lo, hi);
    let mut lo_kind = EndpointKind::Truncation;
    let mut hi_kind = EndpointKind::Truncation;
    if lo == dom.lo {
        if dom.lo_closed {
            lo_kind = dom.lo_kind;
        } else {
            lo += OPEN_END_INSET * width;
        }
    }
    if hi == dom.hi {
        if dom.hi_closed {
            hi_kind = dom.hi_kind;
        } else {
            hi -= OPEN_END_INSET * width;
        }
    }
    Ok(DomainInterval::new(lo, lo_kind, hi, hi_kind))
}

fn sampled_profile(cfg: &JobConfig, p: &ParamArgs, w: &WindowArgs, default_n: usize) -> Result<ProfileCurve, Failure> {
    let params = resolve_params(cfg, p)?;
    let report = classify(&params)?;
    let window = resolve_window(&report.interval, w.lo.or(cfg.lo), w.hi.or(cfg.hi), w.force)?;
    let n = w.n.or(cfg.n).unwrap_or(default_n);
    Ok(sample_profile(&params, &window, n)?)
}

fn emit(bytes: &[u8]) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes)?;
    out.flush()?;
    Ok(())
}

fn emit_json<T: Serialize + ?Sized>(item: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(item).map_err(anyhow::Error::from)?;
    text.push('\n');
    emit(text.as_bytes())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| Failure {
        code: crate::EXIT_DOMAIN,
        message: format!("writing {}: {e}", path.display()),
    })
}

fn cmd_classify(cfg: &JobConfig, p: &ParamArgs) -> Result<(), Failure> {
    let params = resolve_params(cfg, p)?;
    let report = classify(&params)?;
    emit(&export(Exportable::Report(&report), ExportFormat::Json)?)
}

#[derive(Serialize)]
struct Written<'a> {
    out: &'a Path,
    #[serde(skip_serializing_if = "Option::is_none")]
    sidecar: Option<&'a Path>,
    rows: usize,
}

fn cmd_profile(json: bool, cfg: &JobConfig, p: &ParamArgs, w: &WindowArgs, out: Option<&Path>) -> Result<(), Failure> {
    let curve = sampled_profile(cfg, p, w, PROFILE_SAMPLES)?;
    let out = out.or(cfg.out.as_deref());
    let Some(path) = out else {
        let fmt = if json { ExportFormat::Json } else { ExportFormat::Csv };
        return emit(&export(Exportable::Profile(&curve), fmt)?);
    };
    write_file(path, &export(Exportable::Profile(&curve), ExportFormat::Csv)?)?;
    let sidecar = write_sidecar(path, &curve)?;
    if json {
        emit_json(&Written {
            out: path,
            sidecar: Some(&sidecar),
            rows: curve.len(),
        })
    } else {
        println!("wrote {} rows to {} (parameters in {})", curve.len(), path.display(), sidecar.display());
        Ok(())
    }
}

fn cmd_mesh(
    json: bool,
    cfg: &JobConfig,
    p: &ParamArgs,
    w: &WindowArgs,
    n_theta: Option<usize>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let curve = sampled_profile(cfg, p, w, MESH_SAMPLES)?;
    let mesh = build_mesh(&curve, n_theta.or(cfg.n_theta).unwrap_or(MESH_THETA))?;
    let Some(path) = out.or(cfg.out.as_deref()) else {
        let fmt = if json { ExportFormat::Json } else { ExportFormat::Obj };
        return emit(&export(Exportable::Mesh(&mesh), fmt)?);
    };
    write_file(path, &export(Exportable::Mesh(&mesh), ExportFormat::Obj)?)?;
    if json {
        emit_json(&Written {
            out: path,
            sidecar: None,
            rows: mesh.vertices.len(),
        })
    } else {
        println!(
            "wrote {} vertices and {} faces to {}",
            mesh.vertices.len(),
            mesh.quads.len(),
            path.display()
        );
        Ok(())
    }
}

struct FreeBoundaryOpts<'a> {
    audit: bool,
    mesh_out: Option<&'a Path>,
    out: Option<&'a Path>,
    n: usize,
    n_theta: usize,
}

#[derive(Serialize)]
struct AuditEntry {
    b: f64,
    #[serde(flatten)]
    gauss_bonnet: GaussBonnet,
    sum: f64,
}

#[derive(Serialize)]
struct FreeBoundaryOutput<'a> {
    solutions: &'a [FreeBoundarySolution],
    #[serde(skip_serializing_if = "Option::is_none")]
    audit: Option<Vec<AuditEntry>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    meshes: Vec<String>,
}

/// The segment of the z-axis inside the ball, as an OBJ polyline.
const GEODESIC_OBJ: &str = "v 0.0 0.0 -1.0\nv 0.0 0.0 1.0\nl 1 2\n";

fn mesh_file_name(sol: &FreeBoundarySolution) -> String {
    if sol.geodesic {
        "geodesic.obj".to_string()
    } else {
        format!("freeboundary_b{}.obj", fmt_real(sol.b))
    }
}

fn cmd_freeboundary(json: bool, bs: &[f64], opts: &FreeBoundaryOpts<'_>) -> Result<(), Failure> {
    let sols = family_sweep(bs)?;
    let audit = if opts.audit {
        let entries: Vec<AuditEntry> = sols
            .par_iter()
            .filter(|s| !s.geodesic)
            .map(|s| {
                gauss_bonnet_audit(s, GAUSS_BONNET_PANELS).map(|gb| AuditEntry {
                    b: s.b,
                    sum: gb.area_integral + gb.boundary_length,
                    gauss_bonnet: gb,
                })
            })
            .collect::<ricci_rot::Result<_>>()?;
        Some(entries)
    } else {
        None
    };
    let mut meshes = Vec::new();
    if let Some(dir) = opts.mesh_out {
        std::fs::create_dir_all(dir)?;
        let files: Vec<(String, Vec<u8>)> = sols
            .par_iter()
            .map(|s| {
                let bytes = if s.geodesic {
                    GEODESIC_OBJ.as_bytes().to_vec()
                } else {
                    let mesh = build_mesh(&free_boundary_curve(s, opts.n)?, opts.n_theta)?;
                    export(Exportable::Mesh(&mesh), ExportFormat::Obj)?
                };
                Ok((mesh_file_name(s), bytes))
            })
            .collect::<ricci_rot::Result<_>>()?;
        for (name, bytes) in files {
            let path = dir.join(&name);
            write_file(&path, &bytes)?;
            meshes.push(path.display().to_string());
        }
    }
    if let Some(path) = opts.out {
        let csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        let fmt = if csv { ExportFormat::Csv } else { ExportFormat::Json };
        write_file(path, &export(Exportable::Sweep(&sols), fmt)?)?;
    }
    if json {
        return emit_json(&FreeBoundaryOutput {
            solutions: &sols,
            audit,
            meshes,
        });
    }
    let mut text = String::new();
    for s in &sols {
        if s.geodesic {
            let _ = writeln!(text, "b = {}: vertical geodesic, rho = 1", fmt_real(s.b));
        } else {
            let _ = writeln!(
                text,
                "b = {}: rho = {:.12}, neck radius = {:.12}, boundary residual = {:.1e}",
                fmt_real(s.b),
                s.rho,
                s.neck_radius,
                s.residual_boundary
            );
        }
    }
    for e in audit.iter().flatten() {
        let _ = writeln!(
            text,
            "b = {}: int K dA = {:.12}, boundary length = {:.12}, sum = {:.1e}",
            fmt_real(e.b),
            e.gauss_bonnet.area_integral,
            e.gauss_bonnet.boundary_length,
            e.sum
        );
    }
    for m in &meshes {
        let _ = writeln!(text, "wrote {m}");
    }
    emit(text.as_bytes())
}

/// Prints the report and fails with the names of the failing fields.
fn finish_validation(report: &ValidationReport) -> Result<(), Failure> {
    emit(&export(Exportable::Validation(report), ExportFormat::Json)?)?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::validation(format!("validation failed: {}", report.notes.join("; "))))
    }
}

fn cmd_validate_csv(path: &Path, resample: Option<usize>, tol: &ValidationTolerances) -> Result<(), Failure> {
    let meta = read_sidecar(path)?;
    let curve = read_profile_csv(path, &meta)?;
    let n = resample.unwrap_or(curve.len().max(2));
    finish_validation(&validate_curve_with(&curve, tol, n))
}

fn cmd_validate_params(
    cfg: &JobConfig,
    p: &ParamArgs,
    w: &WindowArgs,
    resample: Option<usize>,
    tol: &ValidationTolerances,
) -> Result<(), Failure> {
    let curve = sampled_profile(cfg, p, w, PROFILE_SAMPLES)?;
    let n = resample.unwrap_or(curve.len().max(2));
    finish_validation(&validate_curve_with(&curve, tol, n))
}

#[derive(Serialize)]
struct RandomFailure {
    index: usize,
    family: CaseFamily,
    params: RicciParams,
    notes: Vec<String>,
}

#[derive(Serialize)]
struct FamilyCount {
    family: CaseFamily,
    count: usize,
}

#[derive(Serialize)]
struct RandomSummary {
    seed: u64,
    cases: usize,
    passed: usize,
    families: Vec<FamilyCount>,
    failures: Vec<RandomFailure>,
}

/// Cycles through the case families; all cases are drawn from one stream
/// before any is validated, so the result does not depend on scheduling.
fn cmd_validate_random(
    count: usize,
    seed: u64,
    n: usize,
    resample: usize,
    tol: &ValidationTolerances,
) -> Result<(), Failure> {
    let mut rng = case_rng(seed);
    let cases: Vec<_> = (0..count)
        .map(|i| random_case(CaseFamily::ALL[i % CaseFamily::ALL.len()], &mut rng))
        .collect();
    let outcomes: Vec<Vec<String>> = cases
        .par_iter()
        .map(|case| match sample_profile(&case.params, &case.window, n) {
            Ok(curve) => validate_curve_with(&curve, tol, resample).notes,
            Err(e) => vec![format!("sampling failed: {e}")],
        })
        .collect();
    let failures: Vec<RandomFailure> = cases
        .iter()
        .zip(outcomes)
        .enumerate()
        .filter(|(_, (_, notes))| !notes.is_empty())
        .map(|(index, (case, notes))| RandomFailure {
            index,
            family: case.family,
            params: case.params,
            notes,
        })
        .collect();
    let families = CaseFamily::ALL
        .iter()
        .map(|&family| FamilyCount {
            family,
            count: cases.iter().filter(|c| c.family == family).count(),
        })
        .collect();
    let summary = RandomSummary {
        seed,
        cases: count,
        passed: count - failures.len(),
        families,
        failures,
    };
    emit_json(&summary)?;
    if summary.failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::validation(format!(
            "validation failed for {} of {count} cases",
            summary.failures.len()
        )))
    }
}

fn cmd_omega(
    json: bool,
    cfg: &JobConfig,
    p: &ParamArgs,
    grid: Option<usize>,
    s_range: &[f64],
    x_range: &[f64],
    out: Option<&Path>,
) -> Result<(), Failure> {
    let a = required(p.a, cfg.a, "a")?;
    let b = required(p.b, cfg.b, "b")?;
    let c = required(p.c, cfg.c, "c")?;
    // d plays no part in the region
    let params = RicciParams::new(a, b, c, 0.0);
    let Some(n) = grid else {
        let region = omega_region(&params);
        if json {
            return emit_json(&region);
        }
        let mut text = format!(
            "Omega for (a, b, c) = ({}, {}, {}) is {}\n",
            fmt_real(a),
            fmt_real(b),
            fmt_real(c),
            if region.nonempty { "nonempty" } else { "empty" }
        );
        for (name, l) in [("l1", region.l1), ("l2", region.l2)] {
            let _ = writeln!(
                text,
                "{name}: {} x + {} s + {} = 0",
                fmt_real(l.x_coef),
                fmt_real(l.s_coef),
                fmt_real(l.constant)
            );
        }
        if let Some(s) = region.barrier_s {
            let _ = writeln!(text, "barrier s = {}", fmt_real(s));
        }
        if let Some(x) = region.barrier_x {
            let _ = writeln!(text, "barrier x = {}", fmt_real(x));
        }
        return emit(text.as_bytes());
    };
    if n < 2 {
        return Err(Failure::usage("--grid needs at least 2 points per axis"));
    }
    if s_range.len() != 2 || x_range.len() != 2 {
        return Err(Failure::usage("--s-range and --x-range take two values, lo,hi"));
    }
    let axis = |r: &[f64]| -> Vec<f64> { (0..n).map(|i| r[0] + (r[1] - r[0]) * i as f64 / (n - 1) as f64).collect() };
    let (ss, xs) = (axis(s_range), axis(x_range));
    let mut text = String::from("s,x,inside\n");
    for &s in &ss {
        for &x in &xs {
            let _ = writeln!(text, "{},{},{}", fmt_real(s), fmt_real(x), u8::from(in_omega(&params, s, x)));
        }
    }
    match out.or(cfg.out.as_deref()) {
        Some(path) => write_file(path, text.as_bytes()),
        None => emit(text.as_bytes()),
    }
}
