use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn chifield(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chifield"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn error_record(o: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&o.stderr);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {text}"))
}

/// Data rows of a CSV, with the `#` header dropped.
fn rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(table: &[Vec<String>], name: &str) -> Vec<f64> {
    let j = table[0].iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"));
    table[1..].iter().map(|r| r[j].parse().unwrap()).collect()
}

#[test]
fn closed_form_unit_sphere() {
    let dir = TempDir::new().unwrap();
    let o = chifield(dir.path(), &["closed-form", "--r", "1", "--t", "2,3,4", "--out", "o"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = rows(&dir.path().join("o/closed-form.csv"));
    let dens = column(&t, "maxima_density_sphere");
    let ec = column(&t, "ec_sum_product");
    for (got, want) in dens.iter().zip([1.0827, 0.199962, 0.010735]) {
        assert!((got / want - 1.0).abs() < 1e-4, "{got} vs {want}");
    }
    for (a, b) in dens.iter().zip(&ec) {
        assert!((a - b).abs() < 1e-12);
    }
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/closed-form.json")).unwrap()).unwrap();
    assert_eq!(json["command"], "closed-form");
    assert_eq!(json["config"]["r"], "1");
}

#[test]
fn printed_sign_changes_the_closed_form() {
    let dir = TempDir::new().unwrap();
    let o = chifield(dir.path(), &["closed-form", "--r", "1", "--t", "3", "--sign-variant", "paper_text", "--out", "o"]);
    assert!(o.status.success());
    let t = rows(&dir.path().join("o/closed-form.csv"));
    let d = column(&t, "maxima_density_sphere")[0];
    let ec = column(&t, "ec_sum_product")[0];
    assert!((d - 0.155526).abs() < 1e-5, "{d}");
    assert!((ec - 0.199962).abs() < 1e-5);
}

#[test]
fn reruns_are_byte_identical_across_threads_and_directories() {
    let dir = TempDir::new().unwrap();
    let common = ["a1a2", "--model", "berry", "--t", "1,3", "--n", "20000", "--seed", "7"];
    let mut a = common.to_vec();
    a.extend(["--threads", "1", "--out", "one"]);
    let mut b = common.to_vec();
    b.extend(["--threads", "2", "--out", "two"]);
    assert!(chifield(dir.path(), &a).status.success());
    assert!(chifield(dir.path(), &b).status.success());
    let x = std::fs::read(dir.path().join("one/a1a2.csv")).unwrap();
    let y = std::fs::read(dir.path().join("two/a1a2.csv")).unwrap();
    assert_eq!(x, y);
    let text = String::from_utf8(x).unwrap();
    assert!(text.starts_with("# chifield "));
    assert!(text.contains("# config_sha256 = "));
    assert!(text.contains("# seed = 7"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "# comment\ncommand = closed-form\nr = 3\nt = 1:3:1\nout = o\n").unwrap();
    let o = chifield(dir.path(), &["--config", "run.cfg", "--r", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = rows(&dir.path().join("o/closed-form.csv"));
    assert_eq!(column(&t, "t"), vec![1.0, 2.0, 3.0]);
    assert!((column(&t, "maxima_density_sphere")[1] - 1.0827).abs() < 1e-4);
}

#[test]
fn malformed_config_file_names_the_line() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("bad.cfg"), "command = closed-form\nr = 1\nbogus = 3\n").unwrap();
    let o = chifield(dir.path(), &["--config", "bad.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    let e = error_record(&o);
    assert_eq!(e["kind"], "config");
    assert_eq!(e["line"], 3);
    assert_eq!(e["file"], "bad.cfg");
}

#[test]
fn malformed_spectrum_names_the_line() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("cl.txt"), "3 1.0\n4 oops\n").unwrap();
    let o = chifield(dir.path(), &["simulate-count", "--spectrum", "cl.txt", "--t", "1", "--n", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let e = error_record(&o);
    assert_eq!(e["line"], 2);
    assert_eq!(e["file"], "cl.txt");
}

#[test]
fn bad_values_and_unknown_commands_are_config_errors() {
    let dir = TempDir::new().unwrap();
    for args in [
        &["frobnicate"][..],
        &["closed-form", "--k", "two"],
        &["closed-form", "--no-such-flag", "1"],
        &["a1a2", "--k", "3"],
        &["oracle-hessian", "--model", "berry", "--n", "100"],
    ] {
        let o = chifield(dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert_eq!(error_record(&o)["kind"], "config", "{args:?}");
    }
}

#[test]
fn unwritable_output_is_a_compute_failure() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("file"), "x").unwrap();
    let o = chifield(dir.path(), &["closed-form", "--out", "file/sub"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_record(&o)["kind"], "compute");
}

#[test]
fn validate_single_quick_criterion() {
    let dir = TempDir::new().unwrap();
    let o = chifield(dir.path(), &["validate", "--quick", "--criteria", "A1", "--out", "o"]);
    assert_eq!(o.status.code(), Some(0));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.lines().any(|l| l.starts_with("A1 PASS")), "{out}");
    let t = rows(&dir.path().join("o/validate.csv"));
    assert_eq!(t[1][..2], ["A1".to_string(), "PASS".to_string()]);
}

#[test]
fn small_sphere_simulation() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("cl.txt"), "3 1.0\n").unwrap();
    let o = chifield(
        dir.path(),
        &["simulate-count", "--spectrum", "cl.txt", "--t", "1,2", "--n", "3", "--pixel", "64x128", "--out", "o"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = rows(&dir.path().join("o/simulate-count.csv"));
    assert_eq!(t.len(), 1 + 3 * 2);
    let above = column(&t, "above");
    let maxima = column(&t, "maxima");
    for (a, m) in above.iter().zip(&maxima) {
        assert!(m <= a);
    }
    let pts = rows(&dir.path().join("o/critical-points.csv"));
    let real = column(&pts, "realization");
    let value = column(&pts, "value");
    let index = column(&pts, "index");
    let counted = column(&t, "realization");
    let thresholds = column(&t, "t");
    // the per-realization maxima column is a tally of the critical-point file
    for (row, (&r, &x)) in counted.iter().zip(&thresholds).enumerate() {
        let tally = (0..pts.len() - 1).filter(|&i| real[i] == r && value[i] >= x && index[i] == 2.0).count();
        assert_eq!(tally as f64, maxima[row]);
    }
}

#[test]
fn berry_hessian_oracle() {
    let dir = TempDir::new().unwrap();
    let o = chifield(dir.path(), &["oracle-hessian", "--model", "berry", "--n", "10000", "--out", "o"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = rows(&dir.path().join("o/oracle-hessian.csv"));
    let est = column(&t, "estimate");
    let se = column(&t, "std_error");
    let model = column(&t, "model");
    for i in 0..est.len() {
        assert!((est[i] - model[i]).abs() < 5.0 * se[i], "{}: {} vs {}", t[i + 1][0], est[i], model[i]);
    }
}

#[test]
fn critical_point_count_variants() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("cl.txt"), "4 1.0\n").unwrap();
    let base = ["expected-maxima", "--k", "4", "--t", "2", "--n", "200000"];
    let run = |extra: &[&str]| {
        let mut a = base.to_vec();
        a.extend(extra);
        chifield(dir.path(), &a)
    };
    assert!(run(&["--model", "sphere", "--spectrum", "cl.txt", "--out", "c"]).status.success());
    let c = column(&rows(&dir.path().join("c/expected-maxima.csv")), "expected_critical_points")[0];
    assert!((c - 22.8).abs() < 1.0, "{c}");

    // the printed sphere covariance cannot drive a Monte Carlo run
    let o = run(&["--model", "sphere", "--spectrum", "cl.txt", "--sign-variant", "paper_text"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(error_record(&o)["message"].as_str().unwrap().contains("sign_variant"));

    // on a planar model only the factorization differs; the printed one overcounts
    assert!(run(&["--model", "berry", "--out", "bc"]).status.success());
    assert!(run(&["--model", "berry", "--sign-variant", "paper_text", "--out", "bp"]).status.success());
    let bc = column(&rows(&dir.path().join("bc/expected-maxima.csv")), "expected_critical_points")[0];
    let bp = column(&rows(&dir.path().join("bp/expected-maxima.csv")), "expected_critical_points")[0];
    assert!(bp > 2.0 * bc, "{bp} vs {bc}");
    let mc = column(&rows(&dir.path().join("bc/expected-maxima.csv")), "expected_maxima")[0];
    let mp = column(&rows(&dir.path().join("bp/expected-maxima.csv")), "expected_maxima")[0];
    assert_eq!(mc, mp);
}
