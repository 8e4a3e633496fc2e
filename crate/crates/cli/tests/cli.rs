use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cooler(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cooler")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn bundled_json() -> Value {
    let o = cooler(&["scenario"]);
    assert!(o.status.success());
    serde_json::from_slice(&o.stdout).unwrap()
}

fn write_json(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn validates_bundled_scenario() {
    let o = cooler(&["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("valid: 10 segments"), "{out}");
    // only property-range notices are reported
    for line in out.lines().skip(1) {
        assert!(line.starts_with("warning: heat capacity of"), "{line}");
    }
}

#[test]
fn dumped_scenario_validates_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_json(dir.path(), "s.json", &bundled_json());
    let o = cooler(&["validate", &path]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn composition_error_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = bundled_json();
    v["boundaries"]["clinker"]["composition"]["C3S"] = Value::from(0.6996);
    v["geometry"]["width"] = Value::from(-4.0);
    let path = write_json(dir.path(), "bad.json", &v);
    let o = cooler(&["validate", &path]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("boundaries.clinker.composition"), "{err}");
    assert!(err.contains("geometry.width"), "{err}");
}

#[test]
fn parse_error_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("broken.json");
    fs::write(&p, "{\n  \"name\": 3,\n").unwrap();
    let o = cooler(&["validate", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn missing_file_is_an_io_error() {
    let o = cooler(&["validate", "/nonexistent/scenario.json"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("/nonexistent/scenario.json"));
}

#[test]
fn zero_horizon_exports_initial_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = cooler(&["simulate", "--t-end", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let mut ts = csv::Reader::from_path(out.join("timeseries.csv")).unwrap();
    let headers = ts.headers().unwrap().clone();
    assert_eq!(&headers[0], "time[s]");
    assert!(headers.iter().all(|h| h.ends_with(']')));
    let rows: Vec<csv::StringRecord> = ts.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r[0].parse::<f64>().unwrap() == 0.0));

    let profiles = fs::read_to_string(out.join("steady_profiles.csv")).unwrap();
    assert_eq!(profiles.lines().count(), 11);
    assert!(!profiles.contains('\r'));

    let meta: Value = serde_json::from_str(&fs::read_to_string(out.join("run_meta.json")).unwrap()).unwrap();
    assert_eq!(meta["n_samples"], 1);
    assert_eq!(meta["mode"], "dynamic");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = cooler(&["simulate", "--t-end", "120", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for f in ["timeseries.csv", "steady_profiles.csv", "run_meta.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let ts = fs::read_to_string(a.join("timeseries.csv")).unwrap();
    // samples at 0, 60 and 120 s for 10 cells plus the header
    assert_eq!(ts.lines().count(), 31);
}

#[test]
fn steady_mode_reports_its_residual() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("steady");
    let o = cooler(&["simulate", "--mode", "steady", "--t-end", "600", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let meta: Value = serde_json::from_str(&fs::read_to_string(out.join("run_meta.json")).unwrap()).unwrap();
    assert_eq!(meta["profile_source"], "steady_state");
    assert!(meta["steady_residual"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn solver_failure_writes_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = bundled_json();
    v["integrator"]["max_newton_iter"] = Value::from(1);
    v["integrator"]["step_adaptation"]["enabled"] = Value::from(false);
    v["integrator"]["dt"] = Value::from(30.0);
    let path = write_json(dir.path(), "tight.json", &v);
    let out = dir.path().join("fail");
    let o = cooler(&["simulate", &path, "--t-end", "60", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let diag: Value = serde_json::from_str(&fs::read_to_string(out.join("diagnostic.json")).unwrap()).unwrap();
    assert_eq!(diag["kind"], "stiff_failure");
    assert!(diag["residual"].as_f64().unwrap() > 0.0);
    assert!(!out.join("timeseries.csv").exists());
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = cooler(&["simulate", "--t-end", "0", "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn invalid_step_is_a_validation_error() {
    let o = cooler(&["simulate", "--t-end", "10", "--dt", "-1", "--out", "/tmp/unused-cooler-out"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn species_property_table() {
    let o = cooler(&["properties", "species", "N2", "--T", "300", "1000"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[1], "T[K],cp[J/(mol K)],h[J/mol],k[W/(m K)],mu[Pa s]");
    assert_eq!(lines.len(), 4);
    let mu: f64 = lines[2].split(',').nth(4).unwrap().parse().unwrap();
    assert!(mu > 1e-5 && mu < 3e-5);

    let o = cooler(&["properties", "species", "Unobtainium", "--T", "300"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn mixture_of_one_gas_matches_the_pure_species() {
    let pure = stdout(&cooler(&["properties", "species", "O2", "--T", "800"]));
    let mix = stdout(&cooler(&["properties", "mixture", "--x", "O2=1", "--T", "800"]));
    let mu_pure: f64 = pure.lines().nth(2).unwrap().split(',').nth(4).unwrap().parse().unwrap();
    let mu_mix: f64 = mix.lines().nth(2).unwrap().split(',').nth(5).unwrap().parse().unwrap();
    assert!((mu_pure - mu_mix).abs() <= 1e-6 * mu_pure);

    let o = cooler(&["properties", "mixture", "--x", "C3S=1", "--T", "800"]);
    assert!(!o.status.success());
}

#[test]
fn usage_errors_use_the_validation_code() {
    assert_eq!(cooler(&["simulate", "--mode", "fast"]).status.code(), Some(1));
    assert_eq!(cooler(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(cooler(&["--help"]).status.code(), Some(0));
}
