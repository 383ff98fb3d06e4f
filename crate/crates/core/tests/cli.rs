use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bilayer-gn"));
    for (k, _) in std::env::vars() {
        if k.starts_with("BILAYER_GN_") {
            c.env_remove(k);
        }
    }
    c
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const REST: &str = "initial.zeta.kind = rest\ninitial.v.kind = rest\ngrid.n = 64\n";
const SMALL_GAUSSIAN: &str = "grid.n = 128\ncontrol.snapshot_stride = 5\n";

#[test]
fn coeffs_prints_reference_table() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.cfg", "params.gamma = 0\nparams.delta = 1\n");
    let o = run(&["coeffs", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let value = |name: &str| -> f64 {
        out.lines()
            .find(|l| l.split_whitespace().next() == Some(name))
            .and_then(|l| l.split_whitespace().nth(1))
            .unwrap()
            .parse()
            .unwrap()
    };
    for (name, expect) in [
        ("kappa1", 1.0),
        ("kappa2", 3.0),
        ("omega1", -1.0),
        ("omega2", -3.0),
        ("varsigma", 1.0),
        ("kappa", 2.0 / 3.0),
        ("omega", 0.5),
        ("nu", 1.0 / 3.0),
    ] {
        assert!((value(name) - expect).abs() <= 1e-14, "{name}");
    }
    assert!(out.contains("in_SW = true"));
    assert!(out.contains("in_CH = true"));
}

#[test]
fn coeffs_flags_gamma_one_outside_shallow_water() {
    let o = bin()
        .args(["coeffs"])
        .env("BILAYER_GN_PARAMS_GAMMA", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("in_SW = false"));
    assert!(stdout(&o).contains("violated: 0 <= gamma < 1"));
}

#[test]
fn malformed_file_reports_line() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.cfg",
        "# header\nparams.mu = 0.04\nparams.eps 0.2\n",
    );
    for cmd in ["coeffs", "check", "orders"] {
        let o = run(&[cmd, "--config", &cfg]);
        assert_eq!(o.status.code(), Some(1));
        assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    }
}

#[test]
fn surface_tension_too_strong_is_config_error() {
    let o = bin()
        .args(["coeffs"])
        .env("BILAYER_GN_PARAMS_BO_INV", "0.34")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nu0"));
}

#[test]
fn missing_config_file_is_io_error() {
    let o = run(&["check", "--config", "/nonexistent/scenario.cfg"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn check_rest_passes() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "rest.cfg", REST);
    let o = run(&["check", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("min_h1 = 1.0000000000000000e0"));
    assert!(stdout(&o).contains("status: ok"));
}

#[test]
fn check_large_interface_halts_h1() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "deep.cfg",
        "params.eps = 0.2\ninitial.zeta.amp = 5\n",
    );
    let o = run(&["check", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("halted_H1"));
}

#[test]
fn check_steep_bottom_curvature_halts_h3() {
    // b = a sin(k x) on [0, 2 pi): at sin(k x) = -1 the curvature is b'' = a k^2 and
    // Q0 = (gamma + delta) q1 - mu beta omega b'' with q1 = 1 + omega1 beta b.
    let (mu, beta, a, k) = (0.04, 0.2, 0.6, 23.0);
    let (omega, omega1) = (0.5, -1.0);
    let q0_min = (1.0 + omega1 * beta * (-a)) - mu * beta * omega * a * k * k;
    assert!(q0_min < 0.05);

    let dir = TempDir::new().unwrap();
    let text = format!(
        "params.mu = {mu}\nparams.eps = 0.2\nparams.beta = {beta}\ngrid.length = 6.283185307179586\ngrid.n = 512\n\
         bathymetry.kind = sinusoid\nbathymetry.k = {k}\nbathymetry.height = {a}\ninitial.zeta.kind = rest\n"
    );
    let cfg = write_config(dir.path(), "h3.cfg", &text);
    let o = run(&["check", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(
        out.contains("ok_H1 = true  ok_H2 = true  ok_H3 = false"),
        "{out}"
    );
    assert!(out.contains("halted_H3"));
    let min_h3: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("min_H3 = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((min_h3 - q0_min).abs() < 1e-2, "{min_h3} vs {q0_min}");
}

#[test]
fn run_rest_writes_zero_snapshots() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "rest.cfg", REST);
    let out = dir.path().join("out");
    let o = run(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "completed");
    assert_eq!(summary["lambda_fit"], 0.0);
    assert_eq!(summary["C_fit"], 0.0);
    let snaps = summary["snapshots"].as_array().unwrap();
    assert!(snaps.len() >= 2);
    for s in snaps {
        let text = fs::read_to_string(out.join(s.as_str().unwrap())).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,zeta,v,b"));
        for line in lines {
            let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            assert_eq!((cols[1], cols[2]), (0.0, 0.0));
        }
    }
}

#[test]
fn run_is_byte_identical_and_conserves_mass() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "g.cfg", SMALL_GAUSSIAN);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = run(&[
            "run",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "42",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let mut names: Vec<_> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    let csvs: Vec<_> = names
        .iter()
        .filter(|n| n.to_str().unwrap().ends_with(".csv"))
        .collect();
    assert!(csvs.len() > 2);
    for n in &csvs {
        assert_eq!(
            fs::read(a.join(n)).unwrap(),
            fs::read(b.join(n)).unwrap(),
            "{n:?}"
        );
    }

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    for key in [
        "status",
        "final_time",
        "target_time",
        "steps",
        "violation",
        "lambda_fit",
        "C_fit",
        "growth_ok",
        "mass_drift",
        "seed",
        "snapshots",
        "diagnostics",
        "slopes",
    ] {
        assert!(summary.get(key).is_some(), "{key}");
    }
    assert_eq!(summary["status"], "completed");
    assert_eq!(summary["final_time"], 5.0);
    assert_eq!(summary["seed"], 42);
    assert!(summary["mass_drift"].as_f64().unwrap() <= 1e-10);
    assert_eq!(summary["growth_ok"], true);

    let diag = fs::read_to_string(a.join("diagnostics.csv")).unwrap();
    let mut lines = diag.lines();
    assert_eq!(
        lines.next(),
        Some("t,mass,E0,Es,min_h1,min_h2,min_q1,min_q2,min_H3,dt")
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert!(rows.len() >= 10);
    assert!(rows.iter().all(|r| r.len() == 10 && r[8] >= 0.05));
}

#[test]
fn json_config_matches_text_config() {
    let dir = TempDir::new().unwrap();
    let text = write_config(dir.path(), "t.cfg", "grid.n = 64\nparams.gamma = 0.3\n");
    let json = write_config(
        dir.path(),
        "j.json",
        r#"{"grid": {"n": 64}, "params": {"gamma": 0.3}}"#,
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(
        run(&["run", "--config", &text, "--out", a.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        run(&["run", "--config", &json, "--out", b.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        fs::read(a.join("diagnostics.csv")).unwrap(),
        fs::read(b.join("diagnostics.csv")).unwrap()
    );
}

#[test]
fn run_into_unwritable_directory_is_io_error() {
    let dir = TempDir::new().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "not a directory").unwrap();
    let cfg = write_config(dir.path(), "rest.cfg", REST);
    let out = blocker.join("out");
    let o = run(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn run_with_violating_initial_data_reports_halt() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "deep.cfg",
        "grid.n = 64\ninitial.zeta.amp = 5\n",
    );
    let out = dir.path().join("out");
    let o = run(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "halted_H1");
    assert_eq!(summary["violation"]["condition"], "H1");
    assert_eq!(summary["violation"]["time"], 0.0);
}

#[test]
fn orders_with_short_ladders() {
    let dir = TempDir::new().unwrap();
    let text = "orders.amplitudes = 0.1, 0.05, 0.025\norders.expansion_n = 256\norders.form_ns = 64, 128, 256\n\
                orders.spatial_ns = 64, 128, 256, 512\norders.temporal_dts = 0.1, 0.05, 0.025\norders.temporal_n = 64\n";
    let cfg = write_config(dir.path(), "o.cfg", text);
    let out = dir.path().join("out");
    let o = run(&["orders", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let studies: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("orders.json")).unwrap()).unwrap();
    let studies = studies.as_array().unwrap();
    assert_eq!(studies.len(), 5);
    let slope = |t: &str| {
        studies.iter().find(|s| s["target"] == t).unwrap()["slope"]
            .as_f64()
            .unwrap()
    };
    assert!((slope("qbar_expansion") - 2.0).abs() <= 0.3);
    assert!((slope("rbar_expansion") - 1.0).abs() <= 0.3);
    assert!((slope("temporal") - 4.0).abs() <= 0.5);
}

#[test]
fn orders_rejects_degenerate_ladder() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "o.cfg", "orders.amplitudes = 0.1, 0.05\n");
    let o = run(&["orders", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("at least 3 points"));
}
