//! End-to-end runs of the `vcdim` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn vcdim(args: &[&str]) -> Output {
    vcdim_env(args, None)
}

fn vcdim_env(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_vcdim"));
    cmd.args(args).env_remove("VCDIM_THREADS");
    if let Some(t) = threads {
        cmd.env("VCDIM_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulated(dir: &TempDir) -> PathBuf {
    let data = path(dir, "data.csv");
    ok(&vcdim(&["simulate", "--p", "3", "--n", "120", "--decoys", "2", "--seed", "5", "--out", s(&data)]));
    data
}

#[test]
fn simulate_writes_header_and_rows() {
    let dir = TempDir::new().unwrap();
    let data = simulated(&dir);
    let text = std::fs::read_to_string(&data).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x1,x2,x3,x4,x5,y");
    assert_eq!(lines.count(), 120);
}

#[test]
fn xi_writes_curve_csv_with_one_line_summary() {
    let dir = TempDir::new().unwrap();
    let data = simulated(&dir);
    let out = path(&dir, "xi.csv");
    let stdout = ok(&vcdim(&[
        "xi", "--data", s(&data), "--response", "y", "--terms", "x1,x2,x3",
        "--design-points", "20,40,60", "--b1", "3", "--b2", "3", "--out", s(&out),
    ]));
    assert_eq!(stdout.lines().count(), 1);
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n_l,xi");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("20,"));
}

#[test]
fn identical_runs_are_byte_identical_and_leave_input_untouched() {
    let dir = TempDir::new().unwrap();
    let data = simulated(&dir);
    let before = std::fs::read(&data).unwrap();
    let run = |name: &str, threads: &str| {
        let out = path(&dir, name);
        ok(&vcdim(&[
            "select", "--data", s(&data), "--response", "y", "--order", "correlation",
            "--design-points", "20,40,60", "--b1", "3", "--b2", "3", "--seed", "7",
            "--threads", threads, "--out", s(&out),
        ]));
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "1");
    let c = run("c.csv", "4");
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(std::fs::read(&data).unwrap(), before);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("label,size,vcd,h_hat,c_hat,r_emp,erm1,erm2,bic\n"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn select_json_and_summary_line() {
    let dir = TempDir::new().unwrap();
    let data = simulated(&dir);
    let out = path(&dir, "r.json");
    let stdout = ok(&vcdim(&[
        "select", "--data", s(&data), "--response", "y", "--design-points", "20,40",
        "--b1", "2", "--b2", "2", "--format", "json", "--out", s(&out),
    ]));
    assert!(stdout.starts_with("selected "), "{stdout}");
    assert!(stdout.contains("h_hat=") && stdout.contains("c_hat="));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
    assert_eq!(v["threshold_t"], 2);
}

#[test]
fn fit_h_reads_a_curve_file() {
    let dir = TempDir::new().unwrap();
    let curve = path(&dir, "curve.csv");
    // 2.5 * phi(h = 7, n) at four design points.
    let phi = |h: f64, n: f64| (h / n * (2.0 * n * std::f64::consts::E / h).ln()).sqrt();
    let mut text = String::from("n_l,xi\n");
    for n in [50.0, 100.0, 150.0, 200.0] {
        text.push_str(&format!("{n},{}\n", 2.5 * phi(7.0, n)));
    }
    std::fs::write(&curve, text).unwrap();
    let out = path(&dir, "fit.csv");
    let stdout = ok(&vcdim(&["fit-h", "--xi", s(&curve), "--h-known", "7", "--out", s(&out)]));
    assert_eq!(stdout.trim(), "h_hat=7 c_hat=2.50");
    assert!(std::fs::read_to_string(out).unwrap().starts_with("h,objective\n"));
}

#[test]
fn sweep_with_two_seeds_and_three_sizes_has_six_rows() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "sweep.csv");
    let summary = path(&dir, "summary.json");
    ok(&vcdim(&[
        "sweep", "--p", "3", "--n", "80", "--design-points", "20,40", "--b1", "2", "--b2", "2",
        "--sizes", "2..4", "--seeds", "1,2", "--summary", s(&summary), "--out", s(&out),
    ]));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), "seed,size,h_hat,c_hat,erm1,erm2,bic");
    assert_eq!(text.lines().count() - 1, 6);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(summary).unwrap()).unwrap();
    assert_eq!(v["seeds"], 2);
}

#[test]
fn legacy_sweep_leaves_c_hat_empty() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "legacy.csv");
    ok(&vcdim(&[
        "legacy-sweep", "--p", "3", "--n", "80", "--design-points", "20,40", "--b1", "2", "--b2", "2",
        "--sizes", "3", "--out", s(&out),
    ]));
    let text = std::fs::read_to_string(out).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[3], "");
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = TempDir::new().unwrap();
    let cfg = path(&dir, "sweep.conf");
    std::fs::write(
        &cfg,
        "# small sweep\np = 3\nn = 80\ndesign_points = 20,40\nb1 = 2\nb2 = 2\nsizes = 2..4\nseeds = 1,2\n",
    )
    .unwrap();
    let from_file = path(&dir, "a.csv");
    ok(&vcdim(&["sweep", "--config", s(&cfg), "--out", s(&from_file)]));
    assert_eq!(std::fs::read_to_string(&from_file).unwrap().lines().count(), 7);

    let overridden = path(&dir, "b.csv");
    ok(&vcdim(&["sweep", "--config", s(&cfg), "--seeds", "3", "--out", s(&overridden)]));
    let text = std::fs::read_to_string(&overridden).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().skip(1).all(|l| l.starts_with("3,")));

    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    assert_eq!(vcdim(&["sweep", "--config", s(&cfg), "--p", "3", "--sizes", "3", "--out", "x"]).status.code(), Some(1));
}

#[test]
fn thread_variable_is_a_fallback() {
    let dir = TempDir::new().unwrap();
    let data = simulated(&dir);
    let args = |out: &Path| -> Vec<String> {
        ["xi", "--data", s(&data), "--response", "y", "--design-points", "20,40", "--b1", "3", "--b2", "3", "--out", s(out)]
            .iter()
            .map(|a| a.to_string())
            .collect()
    };
    let run = |name: &str, env: Option<&str>| {
        let out = path(&dir, name);
        let a = args(&out);
        let a: Vec<&str> = a.iter().map(String::as_str).collect();
        let status = vcdim_env(&a, env);
        (status, out)
    };
    let (o1, p1) = run("one.csv", Some("1"));
    let (o2, p2) = run("three.csv", Some("3"));
    ok(&o1);
    ok(&o2);
    assert_eq!(std::fs::read(p1).unwrap(), std::fs::read(p2).unwrap());
    let (bad, _) = run("bad.csv", Some("zero"));
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn exit_statuses() {
    let dir = TempDir::new().unwrap();
    let data = simulated(&dir);
    let out = path(&dir, "o.csv");
    let code = |args: &[&str]| vcdim(args).status.code();

    // Usage and validation errors.
    assert_eq!(code(&["select", "--data", s(&data), "--design-points", "20", "--out", s(&out)]), Some(1));
    assert_eq!(
        code(&["select", "--data", s(&data), "--response", "y", "--design-points", "20", "--threshold", "-1", "--out", s(&out)]),
        Some(1)
    );
    assert_eq!(code(&["frobnicate"]), Some(1));
    assert_eq!(code(&["sweep", "--p", "3", "--sizes", "3", "--threads", "0", "--out", s(&out)]), Some(1));

    // Module errors: a design point larger than the data, an unknown column.
    assert_eq!(
        code(&["xi", "--data", s(&data), "--response", "y", "--design-points", "500", "--b1", "1", "--b2", "1", "--out", s(&out)]),
        Some(2)
    );
    assert_eq!(
        code(&["xi", "--data", s(&data), "--response", "nope", "--design-points", "20", "--out", s(&out)]),
        Some(2)
    );

    // I/O failures: unreadable input, unwritable output.
    let missing = path(&dir, "missing.csv");
    assert_eq!(
        code(&["xi", "--data", s(&missing), "--response", "y", "--design-points", "20", "--out", s(&out)]),
        Some(3)
    );
    let nowhere = path(&dir, "no/such/dir/o.csv");
    assert_eq!(
        code(&["xi", "--data", s(&data), "--response", "y", "--design-points", "20", "--b1", "1", "--b2", "1", "--out", s(&nowhere)]),
        Some(3)
    );
    assert!(!out.exists());

    assert_eq!(code(&["--help"]), Some(0));
    assert_eq!(code(&["--version"]), Some(0));
}
