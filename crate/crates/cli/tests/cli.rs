use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn homsensor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_homsensor")).args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = homsensor(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn default_dip_shape() {
    let csv = stdout(&["dip"]);
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# homsensor dip "));
    assert!(lines.next().unwrap().starts_with("# config: {"));
    assert_eq!(lines.next().unwrap(), "tau_gamma,g2_closed");
    let r = rows(&csv);
    assert_eq!(r.len(), 201);
    assert_eq!((r[0][0], r[100][0], r[200][0]), (-5.0, 0.0, 5.0));
    assert!(r.iter().all(|row| (0.0..=1.0).contains(&row[1])));
}

#[test]
fn uncoupled_dip_is_flat() {
    let r = rows(&stdout(&["dip", "--g-hz", "0"]));
    assert!(r.iter().all(|row| row[1] == 1.0));
}

#[test]
fn oracle_footer_reports_agreement() {
    let csv = stdout(&["dip", "--oracle", "--tau", "-2:2:9"]);
    let footer = csv.lines().last().unwrap();
    let worst: f64 = footer.rsplit("= ").next().unwrap().parse().unwrap();
    assert!(footer.starts_with("# max |g2_closed - g2_oracle|"), "{footer}");
    assert!(worst < 1e-6, "{worst}");
    assert_eq!(rows(&csv)[0].len(), 3);
}

#[test]
fn fisher_single_input() {
    let v: Value = serde_json::from_str(&stdout(&[
        "fisher",
        "--mse",
        "1e-4",
        "--input-config",
        "fock_hom_n2",
        "--format",
        "json",
    ]))
    .unwrap();
    assert_eq!(v["records"][0]["trials"], 625.0);
    assert_eq!(v["records"].as_array().unwrap().len(), 1);
    assert_eq!(v["config"]["mse"], 1e-4);
}

#[test]
fn fit_reports_coefficients_and_quality() {
    let v: Value = serde_json::from_str(&stdout(&["fit-coupling", "--format", "json"])).unwrap();
    let fit = &v["fit"];
    for key in ["a", "b", "d"] {
        assert!(fit["model"][key].as_f64().unwrap() > 0.0, "{key}");
    }
    assert!(fit["r2_x"].as_f64().unwrap() > 0.99);
    assert!(fit["r2_n"].as_f64().unwrap() > 0.99);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "dip.toml", "g_hz = 0.0\ntau = \"0:1:5\"\n");
    let r = rows(&stdout(&["dip", "--config", &cfg]));
    assert_eq!(r.len(), 5);
    assert!(r.iter().all(|row| row[1] == 1.0));
    // the flag wins over the file
    let r = rows(&stdout(&["dip", "--config", &cfg, "--g-hz", "1.8e9"]));
    assert_eq!(r.len(), 5);
    assert!(r[0][1] < 1.0);
}

#[test]
fn config_file_output_keys() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fisher.json");
    let cfg = write(
        dir.path(),
        "fisher.toml",
        &format!("mse = 1e-2\nformat = \"json\"\nout = {:?}\n", out.to_str().unwrap()),
    );
    assert!(stdout(&["fisher", "--config", &cfg]).is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["records"][3]["trials"], 6.25);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "gamma_hz = 1e9\nkapa_hz = 2e9\n");
    let out = homsensor(&["dip", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kapa_hz"));
}

#[test]
fn validation_errors_exit_with_two() {
    for args in [
        &["dip", "--gamma-hz", "-1"][..],
        &["dip", "--g-hz", "0", "--kappa-hz", "1e9", "--gamma-hz", "1e9"],
        &["fisher", "--t1", "1.5"],
        &["fisher", "--input", "squeezed"],
        &["respo-map", "--signal-grid", "0.1:5:2000", "--kappa-grid", "0.1:5:1000"],
        &["ldr", "--kappa-hz", "2e9", "--g-hz", "1.8e9"],
    ] {
        let out = homsensor(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn io_errors_exit_with_three() {
    let out = homsensor(&["fisher", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn ridge_is_reported() {
    let csv = stdout(&["respo-map", "--signal-grid", "0.01:1:100", "--kappa-grid", "2:2:1"]);
    let ridge = csv.lines().find(|l| l.starts_with("# ridge")).unwrap();
    assert!(!ridge.contains("none"), "{ridge}");
}

#[test]
fn supplied_stack_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::new();
    for _ in 0..4 {
        text.push_str("[[layers]]\nthickness_nm = 71.42857142857143\nindex = 3.5\n");
        text.push_str("[[layers]]\nthickness_nm = 250.0\nindex = 1.0\n");
    }
    let stack = write(dir.path(), "stack.toml", &text);
    let r = rows(&stdout(&["tmm-spectrum", "--stack", &stack, "--lambda-grid", "990:1010:5"]));
    assert_eq!(r.len(), 5);
    for row in &r {
        assert!((row[1] + row[2] - 1.0).abs() < 1e-10);
    }
    // quarter-wave stop band centre
    assert!(r[2][2] > 0.99);
}
