use std::process::{Command, Output};

use serde_json::Value;

fn polyens(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyens")).args(args).output().unwrap()
}

fn polyens_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyens")).args(args).env("POLYENS_THREADS", threads).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Lines that are not `#` provenance comments.
fn data_lines(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

/// The JSON document on stdout.
fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap()
}

#[test]
fn kernel_grid_csv() {
    let o = polyens(&["kernel", "--n", "4", "--M", "2", "--nu", "0,1", "--l", "11", "--grid-x", "0.1,0.5", "--grid-y", "0.1,0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("# config: "));
    assert!(out.contains("# tolerance: 1e-9"));
    let rows = data_lines(&out);
    assert_eq!(rows[0], "x,y,value,abs_imag_residual,route,converged");
    assert_eq!(rows.len(), 5);
    for r in &rows[1..] {
        let fields: Vec<&str> = r.split(',').collect();
        assert_eq!(fields.len(), 6);
        assert!(fields[2].parse::<f64>().unwrap().is_finite());
        assert!(r.ends_with(",contour,true"));
    }
}

#[test]
fn missing_l_is_a_usage_error() {
    let o = polyens(&["kernel", "--model", "truncated", "--n", "3", "--M", "1", "--nu", "1", "--grid", "0.2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--l"));
}

#[test]
fn degenerate_truncation_is_explained() {
    let o = polyens(&["kernel", "--n", "3", "--M", "1", "--nu", "1", "--l", "6", "--grid", "0.2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("always has 1 as a singular value"), "{}", stderr(&o));
}

#[test]
fn bad_flags_and_unknown_keys_are_usage_errors() {
    assert_eq!(polyens(&["kernel", "--bogus", "1"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "n = 2\nwidth = 3\n").unwrap();
    let o = polyens(&["kernel", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("width"), "{}", stderr(&o));
    // a key the command does not read
    std::fs::write(&cfg, "n = 2\nM = 1\nnu = [0]\nalpha = 1.0\n").unwrap();
    let o = polyens(&["hard-edge", "--config", cfg.to_str().unwrap(), "--grid", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "model = \"truncated\"\nn = 2\nM = 1\nnu = [0]\nl = 5\ngrid = [0.3]\n").unwrap();
    let path = cfg.to_str().unwrap();
    let base = polyens(&["kernel", "--config", path]);
    let over = polyens(&["kernel", "--config", path, "--l", "8"]);
    assert_eq!(base.status.code(), Some(0), "{}", stderr(&base));
    assert_eq!(over.status.code(), Some(0), "{}", stderr(&over));
    assert!(stdout(&base).contains("\"l\":5"));
    assert!(stdout(&over).contains("\"l\":8"));
    assert_ne!(data_lines(&stdout(&base))[1], data_lines(&stdout(&over))[1]);
}

#[test]
fn sampling_is_reproducible_across_runs_and_threads() {
    let args = ["sample", "--model", "ginibre", "--n", "3", "--M", "2", "--nu", "0,1", "--samples", "500", "--seed", "9"];
    let a = polyens_env(&args, "1");
    let b = polyens_env(&args, "3");
    let c = polyens_env(&args, "3");
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let out = stdout(&a);
    assert!(out.contains("# seed: 9"));
    assert!(out.contains("# rejections: 0"));
    assert_eq!(data_lines(&out)[0], "draw,x1,x2,x3");
    assert_eq!(data_lines(&out).len(), 501);
    assert_eq!(out, stdout(&b));
    assert_eq!(out, stdout(&c));
}

#[test]
fn out_file_replaces_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hard_edge.csv");
    let o = polyens(&["hard-edge", "--M", "2", "--nu", "0,1", "--grid", "0.5,1", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(data_lines(&text).len(), 5);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn verify_reports_pass() {
    for args in [&["verify", "--suite", "telescoping"][..], &["verify", "--suite", "biorthogonality", "--n", "6"]] {
        let o = polyens(args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let doc = json(&o);
        assert_eq!(doc["pass"], Value::Bool(true));
        let report = &doc["reports"][0];
        assert_eq!(report["suite"], Value::String(args[2].to_string()));
        for case in report["cases"].as_array().unwrap() {
            assert!(case["metric"].as_f64().unwrap() <= case["threshold"].as_f64().unwrap());
            assert_eq!(case["pass"], Value::Bool(true));
        }
    }
}

#[test]
fn density_compare_ginibre() {
    let o = polyens(&["density-compare", "--model", "ginibre", "--n", "3", "--nu", "0,1", "--samples", "100000", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = json(&o);
    assert!(doc["ks_distance"].as_f64().unwrap() <= 0.02);
    assert_eq!(doc["pass"], Value::Bool(true));
    assert_eq!(doc["provenance"]["seed"], Value::from(7));
}

#[test]
fn failed_grid_points_exit_with_a_diagnostic() {
    let o = polyens(&["borodin", "--alpha", "0", "--theta", "2", "--grid=-1"]);
    assert_eq!(o.status.code(), Some(1));
    let diag: Value = serde_json::from_str(&stderr(&o)).unwrap();
    assert_eq!(diag["error"], Value::String("grid_evaluation".into()));
    assert!(stdout(&o).contains(",false"));
}
