use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ricci-rot"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn classify_catenoid() {
    let out = run(&["classify", "--a", "0", "--b", "1", "--c", "0", "--d", "1"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["case"], "CatenoidalRicci");
    assert_eq!(v["catenoid"], true);
}

#[test]
fn classify_inadmissible_exits_2() {
    let out = run(&["classify", "--a", "1", "--b", "0", "--c", "0"]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("inadmissible: (a,b,c) ∈ ℰ₁"), "{err}");
}

#[test]
fn classify_bounded_interval() {
    let out = run(&["classify", "--a", "0", "--b", "2", "--c", "0", "--d", "1"]);
    let v = stdout_json(&out);
    let e = 0.5f64.sqrt();
    assert!((v["interval"]["lo"].as_f64().unwrap() + e).abs() < 1e-12);
    assert!((v["interval"]["hi"].as_f64().unwrap() - e).abs() < 1e-12);
}

#[test]
fn negative_flag_values_parse() {
    let out = run(&["classify", "--a", "-0.5", "--b", "-1", "--c", "0.2", "--d", "-2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn missing_parameter_is_usage_error() {
    let out = run(&["classify", "--a", "0", "--b", "1", "--c", "0"]);
    assert_eq!(code(&out), 64);
    assert_eq!(code(&run(&["classify", "--bogus"])), 64);
}

#[test]
fn help_on_every_command() {
    for cmd in ["classify", "profile", "mesh", "freeboundary", "validate", "omega"] {
        let out = run(&[cmd, "--help"]);
        assert_eq!(code(&out), 0, "{cmd}");
        assert!(String::from_utf8_lossy(&out.stdout).contains("--json"), "{cmd}");
    }
}

fn read_csv_rows(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn catenoid_profile_then_validate() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cat.csv");
    let csv_s = csv.to_str().unwrap();
    let out = run(&[
        "profile", "--a", "0", "--b", "1", "--c", "0", "--d", "1", "--lo", "-2", "--hi", "2", "--n", "101", "--out",
        csv_s,
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv_rows(&csv);
    assert_eq!(rows.len(), 101);
    assert!(rows.iter().all(|r| r[6] <= 1e-9));
    assert!(dir.path().join("cat.csv.params.json").exists());

    let out = run(&["validate", "--input", csv_s]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["passed"], true);

    // corrupt one radius
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let mut fields: Vec<String> = lines[40].split(',').map(str::to_string).collect();
    let f: f64 = fields[1].parse().unwrap();
    fields[1] = format!("{:?}", f * 1.01);
    lines[40] = fields.join(",");
    std::fs::write(&csv, lines.join("\n") + "\n").unwrap();
    let out = run(&["validate", "--input", csv_s]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("max_ode_residual"));
    assert_eq!(stdout_json(&out)["passed"], false);
}

#[test]
fn window_beyond_bound_is_refused() {
    let args = ["profile", "--a", "0", "--b", "2", "--c", "0", "--d", "1", "--lo", "-3", "--hi", "0"];
    assert_eq!(code(&run(&args)), 3);
    let mut forced = args.to_vec();
    forced.push("--force");
    let out = run(&forced);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn cylinder_mesh_is_closed_tube() {
    let out = run(&[
        "mesh", "--a", "0", "--b", "0", "--c", "0", "--d", "1", "--lo", "-1", "--hi", "1", "--n", "3", "--n-theta", "8",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let verts = text.lines().filter(|l| l.starts_with("v ")).count();
    let faces: Vec<&str> = text.lines().filter(|l| l.starts_with("f ")).collect();
    assert_eq!(verts, 24);
    assert_eq!(faces.len(), 16);
    // the seam face joins the last meridian to the first
    assert!(faces.contains(&"f 8 1 9 16"));
}

#[test]
fn funnel_mesh_radii_exceed_one() {
    let dir = tempfile::tempdir().unwrap();
    let obj = dir.path().join("funnel.obj");
    let out = run(&["mesh", "--a", "1", "--b", "0", "--c", "-1", "--d", "0", "--lo", "-8", "--out", obj.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&obj).unwrap();
    for l in text.lines().filter(|l| l.starts_with("v ")) {
        let v: Vec<f64> = l[2..].split(' ').map(|x| x.parse().unwrap()).collect();
        assert!(v[0].hypot(v[1]) > 1.0, "{l}");
    }
}

#[test]
fn freeboundary_critical_catenoid() {
    let out = run(&["--json", "freeboundary", "--b", "1"]);
    assert_eq!(code(&out), 0);
    let rho = stdout_json(&out)["solutions"][0]["rho"].as_f64().unwrap();
    assert!((rho - 0.694817).abs() < 1e-5);
}

#[test]
fn freeboundary_sweep_writes_meshes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "freeboundary",
        "--sweep",
        "0,0.25,0.5,0.75,1",
        "--mesh-out",
        dir.path().to_str().unwrap(),
        "--n",
        "21",
        "--n-theta",
        "12",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let mut names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "freeboundary_b0.25.obj",
            "freeboundary_b0.5.obj",
            "freeboundary_b0.75.obj",
            "freeboundary_b1.0.obj",
            "geodesic.obj"
        ]
    );
}

#[test]
fn freeboundary_audit_sums_to_zero() {
    let out = run(&["--json", "freeboundary", "--b", "1", "--audit"]);
    let v = stdout_json(&out);
    let e = &v["audit"][0];
    assert!(e["sum"].as_f64().unwrap().abs() < 1e-8);
    assert!(e["area_integral"].as_f64().unwrap() < 0.0);
}

#[test]
fn freeboundary_sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = run(&["freeboundary", "--sweep", "0.5,1", "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("b,rho,neck_radius"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn validate_random_sweep_passes_and_is_deterministic() {
    let a = run(&["validate", "--random", "100", "--seed", "7"]);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stdout));
    let v = stdout_json(&a);
    assert_eq!(v["passed"], 100);
    assert_eq!(v["families"].as_array().unwrap().len(), 4);
    let b = run(&["validate", "--random", "100", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn thread_cap_does_not_change_output() {
    let args = ["validate", "--random", "8", "--seed", "3"];
    let one = Command::new(env!("CARGO_BIN_EXE_ricci-rot"))
        .args(args)
        .env("RICCI_ROT_THREADS", "1")
        .output()
        .unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_ricci-rot"))
        .args(args)
        .env("RICCI_ROT_THREADS", "4")
        .output()
        .unwrap();
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, many.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_ricci-rot"))
        .args(args)
        .env("RICCI_ROT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 64);
}

#[test]
fn config_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.toml");
    std::fs::write(&cfg, "a = 0.0\nb = 1.0\nc = 0.0\nd = 1.0\n").unwrap();
    let cfg_s = cfg.to_str().unwrap();
    let out = run(&["--config", cfg_s, "classify"]);
    assert_eq!(stdout_json(&out)["catenoid"], true);
    let out = run(&["--config", cfg_s, "classify", "--b", "2"]);
    assert_eq!(stdout_json(&out)["catenoid"], Value::Null);

    std::fs::write(&cfg, "a = 0.0\ncolour = 1\n").unwrap();
    assert_eq!(code(&run(&["--config", cfg_s, "classify"])), 64);
    std::fs::write(&cfg, "[tolerances]\node = -1.0\n").unwrap();
    assert_eq!(code(&run(&["--config", cfg_s, "classify"])), 64);
}

#[test]
fn omega_grid_scan() {
    let out = run(&["omega", "--a", "0", "--b", "1", "--c", "0", "--grid", "3", "--s-range", "-1,1", "--x-range", "0.5,2"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "s,x,inside");
    assert_eq!(lines.len(), 10);
    // x > |s| for the catenoid constants
    assert!(lines.contains(&"0.0,0.5,1"));
    assert!(lines.contains(&"-1.0,0.5,0"));
    let out = run(&["--json", "omega", "--a", "1", "--b", "0", "--c", "0"]);
    assert_eq!(stdout_json(&out)["nonempty"], false);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = ["profile", "--a", "0.7", "--b", "-0.5", "--c", "0.3", "--d", "1.2", "--n", "51"];
    let a = run(&args);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, run(&args).stdout);
}
