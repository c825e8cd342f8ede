use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_comb-entangler"));
    cmd.env("COMB_ENTANGLER_THREADS", "2");
    cmd
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run_ok(cmd: &mut Command) {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn uncoupled_spectrum_is_constant_shot_noise() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "g0.json",
        r#"{"unit":"dimensionless","theta":0.3,"mechanical":{"omega_m":0.1,"q_m":1e4,"n_th":10},
            "modes":[{"kappa_e":1.0,"g":0.0}]}"#,
    );
    let out = dir.path().join("s.csv");
    run_ok(bin().args(["spectrum"]).arg(&cfg).args(["--omega-points", "33", "--out"]).arg(&out));
    let header = fs::read_to_string(&out).unwrap();
    assert!(header.starts_with("omega,omega_over_omega_m,j,l,xx_re,xx_im,yy_re,yy_im,validity\n"));
    let data = rows(&out);
    assert_eq!(data.len(), 33);
    for r in data {
        assert_eq!(r[4].parse::<f64>().unwrap(), 0.5);
        assert_eq!(r[6].parse::<f64>().unwrap(), 0.5);
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("s.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "spectrum");
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn full_and_oracle_routes_agree() {
    let dir = TempDir::new().unwrap();
    let full = dir.path().join("full.csv");
    let oracle = dir.path().join("oracle.csv");
    for (route, out) in [("full", &full), ("oracle", &oracle)] {
        run_ok(
            bin()
                .arg("spectrum")
                .arg(config("detuned-three-mode.json"))
                .args(["--omega-points", "101", "--route", route, "--out"])
                .arg(out),
        );
    }
    let (a, b) = (rows(&full), rows(&oracle));
    assert_eq!(a.len(), b.len());
    for (ra, rb) in a.iter().zip(&b) {
        assert_eq!(ra[..4], rb[..4]);
        let re = |r: &[String], k: usize| r[k].parse::<f64>().unwrap();
        for (re_k, im_k) in [(4, 5), (6, 7)] {
            let za = (re(ra, re_k), re(ra, im_k));
            let zb = (re(rb, re_k), re(rb, im_k));
            let diff = ((za.0 - zb.0).powi(2) + (za.1 - zb.1).powi(2)).sqrt();
            let norm = (zb.0.powi(2) + zb.1.powi(2)).sqrt();
            assert!(diff <= 1e-8 * norm + 1e-12, "{ra:?} vs {rb:?}");
        }
    }
}

#[test]
fn simplified_route_flags_resonance() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("s.csv");
    run_ok(
        bin()
            .arg("spectrum")
            .arg(config("two-mode.json"))
            .args(["--omega-min", "0.5", "--omega-max", "1.5", "--omega-points", "101", "--route", "simplified", "--out"])
            .arg(&out),
    );
    for r in rows(&out) {
        let w: f64 = r[1].parse().unwrap();
        let flagged = r[8] == "0";
        assert_eq!(flagged, (w - 1.0).abs() < 1e-9, "ω/Ω = {w}");
    }
}

#[test]
fn ten_mode_matrix_below_bound() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("v.csv");
    run_ok(
        bin()
            .arg("variance")
            .arg(config("ten-mode.json"))
            .args(["--omega-points", "11", "--matrix-at", "1.04", "--out"])
            .arg(&out),
    );
    let text = fs::read_to_string(dir.path().join("v.matrix.csv")).unwrap();
    let mut entries = 0;
    for line in text.lines().skip(1) {
        for cell in line.split(',').skip(1).filter(|c| !c.is_empty()) {
            assert!(cell.parse::<f64>().unwrap() < 2.0);
            entries += 1;
        }
    }
    assert_eq!(entries, 90);
    assert_eq!(rows(&out).len(), 11 * 45);
}

#[test]
fn theta_sweep_produces_heatmap_rows() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("h.csv");
    run_ok(
        bin()
            .arg("variance")
            .arg(config("two-mode.json"))
            .args(["--omega-points", "20", "--theta-min", "-3.14", "--theta-max", "3.14", "--theta-points", "9", "--out"])
            .arg(&out),
    );
    assert_eq!(rows(&out).len(), 20 * 9);
}

#[test]
fn ensemble_is_deterministic_and_collapses_without_disorder() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str, sigma: &str| {
        let out = dir.path().join(name);
        run_ok(
            bin()
                .arg("ensemble")
                .arg(config("four-mode.json"))
                .args(["--omega-points", "40", "--sigma", sigma, "--samples", "4", "--seed", "3", "--out"])
                .arg(&out),
        );
        fs::read_to_string(out).unwrap()
    };
    assert_eq!(run("a.csv", "0.1"), run("b.csv", "0.1"));
    let flat = run("c.csv", "0");
    for line in flat.lines().skip(1) {
        let c: Vec<&str> = line.split(',').collect();
        assert_eq!(c[4], c[5]);
        assert_eq!(c[5], c[6]);
    }
}

#[test]
fn reproduce_writes_summary_and_manifest() {
    let dir = TempDir::new().unwrap();
    run_ok(bin().args(["reproduce", "experiment-optical", "--out-dir"]).arg(dir.path()));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    let checks = summary["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["pass"].as_bool().unwrap()), "{checks:?}");
    assert!(dir.path().join("curve.csv").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 3);
}

#[test]
fn bad_inputs_exit_nonzero() {
    let dir = TempDir::new().unwrap();
    let bad = write_config(dir.path(), "bad.json", r#"{"unit":"dimensionless","theta":0,"mechanical":{"omega_m":0.1,"q_m":1e4,"n_th":1},"modes":[{"kappa_e":-1,"g":0}]}"#);
    let out = bin().arg("spectrum").arg(&bad).arg("--out").arg(dir.path().join("x.csv")).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("modes[0].kappa_e"));

    let missing = bin().args(["spectrum", "/nonexistent.json", "--out", "x.csv"]).output().unwrap();
    assert!(!missing.status.success());

    let same = bin()
        .arg("variance")
        .arg(config("two-mode.json"))
        .args(["--pairs", "1-1", "--out"])
        .arg(dir.path().join("y.csv"))
        .output()
        .unwrap();
    assert!(!same.status.success());
}
