use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_surface-ac"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn data_rows(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(str::to_string)
        .collect()
}

#[test]
fn run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = out.to_str().unwrap();
    let r = run(&[
        "run",
        "--mesh",
        "icosphere:2:20",
        "--b",
        "0.2",
        "--iters",
        "40",
        "--seed",
        "3",
        "--out",
        o,
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    for f in [
        "field.ply",
        "field.txt",
        "trace.csv",
        "report.txt",
        "report.json",
        "manifest.json",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let ply = fs::read_to_string(out.join("field.ply")).unwrap();
    assert!(ply.lines().any(|l| l == "element vertex 162"));
    assert!(ply.lines().any(|l| l == "comment b = 0.2"));
    assert_eq!(fs::read_to_string(out.join("field.txt")).unwrap().lines().count(), 162);
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(trace.lines().any(|l| l == "step,energy,max_abs_u,mean_u"));
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("# seed = 3"));
    assert!(report.lines().any(|l| l.starts_with("class = ")));
}

#[test]
fn rerun_is_bitwise_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut fields = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let r = run(&[
            "run",
            "--mesh",
            "icosphere:3:30",
            "--b=-0.2",
            "--iters",
            "60",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&r), 0);
        fields.push(fs::read(out.join("field.txt")).unwrap());
    }
    assert_eq!(fields[0], fields[1]);
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# localized start\nmesh = icosphere:3:40\nb = -0.08\ndt = 0.9\niters = 30\ninit = localized\nradius = 2\n",
    )
    .unwrap();
    let out = dir.path().join("o");
    let r = run(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--iters",
        "20",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("# iters = 20"));
    assert!(report.contains("# dt = 0.9"));
    assert!(report.contains("steps = 20") || report.contains("termination = converged"));
    assert!(report.contains("outside_variance = "));
}

#[test]
fn invalid_dt_is_an_input_error_before_compute() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let r = run(&["run", "--dt", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&r), 2);
    assert!(String::from_utf8_lossy(&r.stderr).contains("dt"));
    assert!(!out.exists());
    let r = run(&["run", "--dt=-0.1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&r), 2);
}

#[test]
fn input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("o");
    let o = o.to_str().unwrap();
    assert_eq!(code(&run(&["run", "--mesh", "/nonexistent/mesh.obj", "--out", o])), 2);
    assert_eq!(code(&run(&["run", "--mesh", "icosphere:banana", "--out", o])), 2);
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "b = 0\nwhat\n").unwrap();
    let r = run(&["run", "--config", cfg.to_str().unwrap(), "--out", o]);
    assert_eq!(code(&r), 2);
    assert!(String::from_utf8_lossy(&r.stderr).contains("line 2"));
}

#[test]
fn usage_errors() {
    assert_eq!(code(&run(&["run", "--bogus"])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["run", "--init", "everywhere"])), 1);
    assert_eq!(code(&run(&[])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn sweep_rows_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let r = run(&[
        "sweep",
        "--mesh",
        "icosphere:4:80",
        "--iters",
        "1500",
        "--seed",
        "7",
        "--b-list=-0.5,-0.2,0,0.2,0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let rows = data_rows(&out.join("sweep.csv"));
    let classes: Vec<&str> = rows.iter().map(|r| r.split(',').nth(1).unwrap()).collect();
    assert_eq!(classes, ["uniform", "spots", "stripes", "inverted_spots", "uniform"]);
    let bs: Vec<f64> = rows
        .iter()
        .map(|r| r.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(bs, [-0.5, -0.2, 0.0, 0.2, 0.5]);
}

#[test]
fn sweep_plain_allen_cahn_gives_stripes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let r = run(&[
        "sweep",
        "--iters",
        "1500",
        "--seed",
        "7",
        "--b-list",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&r), 0);
    let rows = data_rows(&out.join("sweep.csv"));
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("0,stripes,"), "{}", rows[0]);
}

#[test]
fn empty_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let r = run(&[
        "sweep",
        "--mesh",
        "icosphere:1",
        "--b-list",
        "",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&r), 0);
    assert!(data_rows(&out.join("sweep.csv")).is_empty());
}

#[test]
fn sweep_records_row_failures() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    // a one-iteration linear budget cannot converge; every row fails and the sweep still succeeds
    let r = run(&[
        "sweep",
        "--mesh",
        "icosphere:2",
        "--iters",
        "5",
        "--set",
        "linear_max_iterations=1",
        "--set",
        "linear_tolerance=1e-14",
        "--b-list=0,0.1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&r), 0);
    let rows = data_rows(&out.join("sweep.csv"));
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.split(',').nth(1) == Some("error")), "{rows:?}");
}

#[test]
fn oned_kink_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k");
    let r = run(&[
        "oned",
        "--b",
        "0",
        "--u0",
        "0",
        "--du0",
        "0.7071067811865476",
        "--x-end",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&r), 0);
    let rows = data_rows(&out.join("profile.csv"));
    assert!(rows.len() > 100);
    let worst = rows
        .iter()
        .map(|r| r.rsplit(',').next().unwrap().parse::<f64>().unwrap().abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");
    let report = fs::read_to_string(out.join("oned_report.txt")).unwrap();
    let err: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("kink_max_error = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(err < 1e-6);
}

#[test]
fn oned_concavity_flags() {
    let dir = tempfile::tempdir().unwrap();
    for (b, flag) in [("1", "concavity = concave_up"), ("-1", "concavity = concave_down")] {
        let out = dir.path().join(format!("c{b}"));
        let r = run(&["oned", "--b", b, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&r), 0);
        assert!(String::from_utf8_lossy(&r.stdout).contains(flag), "b = {b}");
    }
}

#[test]
fn oned_blow_up_is_numerical() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(&[
        "oned",
        "--b",
        "1",
        "--x-end",
        "4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&r), 3);
    assert!(String::from_utf8_lossy(&r.stderr).contains("at x = "));
}

#[test]
fn validate_reports() {
    let r = run(&["validate", "--mesh", "icosphere:2"]);
    assert_eq!(code(&r), 0);
    let text = String::from_utf8_lossy(&r.stdout);
    assert!(text.lines().any(|l| l == "defects = 0"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("open.obj");
    fs::write(&path, "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 2 3\nf 1 3 4\n").unwrap();
    let r = run(&["validate", "--mesh", path.to_str().unwrap()]);
    assert_eq!(code(&r), 2);
    assert!(String::from_utf8_lossy(&r.stdout).contains("boundary_edges = 4"));
    let r = run(&["validate", "--json", "--mesh", path.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&r.stdout).trim_start().starts_with('{'));
}
