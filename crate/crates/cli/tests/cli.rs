use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn knotfield(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knotfield"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

#[test]
fn hopfion_vtk_has_three_vectors_and_one_scalar() {
    let d = TempDir::new().unwrap();
    write(d.path(), "run.conf", "output.1.kind = fields\noutput.1.format = vtk\noutput.1.path = f.vtk\n");
    let o = knotfield(d.path(), &["fields", "--config", "run.conf"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(d.path().join("f.vtk")).unwrap();
    assert_eq!(text.lines().next(), Some("# vtk DataFile Version 3.0"));
    assert!(text.contains("DIMENSIONS 32 32 32"));
    for name in ["VECTORS E double", "VECTORS B double", "VECTORS S double", "SCALARS u double 1"] {
        assert_eq!(text.matches(name).count(), 1, "{name}");
    }
}

#[test]
fn csv_has_one_row_per_node() {
    let d = TempDir::new().unwrap();
    let o = knotfield(
        d.path(),
        &["fields", "--set", "grid.points_per_axis=6", "--set", "output.0.kind=fields", "--set", "output.0.format=csv", "--set", "output.0.path=g.csv"],
    );
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(d.path().join("g.csv")).unwrap();
    assert_eq!(text.lines().count(), 6 * 6 * 6 + 1);
}

#[test]
fn missing_outputs_is_a_config_error() {
    let d = TempDir::new().unwrap();
    let o = knotfield(d.path(), &["fields"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid config"));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&knotfield(d.path(), &["fields", "--config", "absent.conf"])), 3);
}

fn observables(dir: &Path, extra: &[&str]) -> Value {
    let mut args = vec!["observables", "--set", "output.1.kind=observables", "--set", "output.1.format=json", "--set", "output.1.path=obs.json"];
    args.extend_from_slice(extra);
    let o = knotfield(dir, &args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&fs::read_to_string(dir.join("obs.json")).unwrap()).unwrap()
}

#[test]
fn hopfion_report_is_its_own_reference() {
    let d = TempDir::new().unwrap();
    let r = observables(d.path(), &[]);
    assert_eq!(r["energy_ratio_vs_hopfion"].as_f64(), Some(1.0));
    assert!(!r["conventions"].as_str().unwrap().is_empty());
    for key in ["energy", "photon_number", "spin_helicity", "magnetic_helicity"] {
        let e = &r[key];
        assert!(e["error_estimate"].is_f64(), "{key}");
        assert!(e["closed_form_derived"].is_f64() && e["closed_form_published"].is_f64());
        assert!(e["rel_deviation"].as_f64().unwrap() < 1e-8);
    }
}

#[test]
fn trefoil_ratios() {
    let d = TempDir::new().unwrap();
    let r = observables(d.path(), &["--set", "indices.n=2", "--set", "indices.m=3"]);
    assert!((r["energy_ratio_vs_hopfion"].as_f64().unwrap() - 3.75).abs() < 1e-10);
    assert!((r["helicity_ratio_vs_hopfion"].as_f64().unwrap() - 3.5).abs() < 1e-10);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let d = TempDir::new().unwrap();
    observables(d.path(), &[]);
    let first = fs::read(d.path().join("obs.json")).unwrap();
    observables(d.path(), &[]);
    assert_eq!(first, fs::read(d.path().join("obs.json")).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert!(text.contains("\"energy_ratio_vs_hopfion\": 1.0000000000000000e0"));
}

#[test]
fn identities_pass_for_the_hopfion() {
    let d = TempDir::new().unwrap();
    let o = knotfield(d.path(), &["verify", "--suite", "identities", "--set", "verify.points=200"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("PASS identities/t0_reduction"));
    assert!(out.contains("PASS identities/transversality"));
    assert!(out.contains("PASS identities/polarization_completeness"));
}

#[test]
fn topology_suite_reports_linking_six() {
    let d = TempDir::new().unwrap();
    let o = knotfield(d.path(), &["verify", "--suite", "topology", "--set", "indices.n=2", "--set", "indices.m=3"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("linking = 6.0"));
}

#[test]
fn failed_check_exits_with_one() {
    let d = TempDir::new().unwrap();
    let o = knotfield(d.path(), &["verify", "--suite", "topology", "--set", "trace.max_arc_length=2"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAIL topology/closure"));
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&knotfield(d.path(), &["verify", "--suite", "everything"])), 2);
}

#[test]
fn quantum_suite_writes_correlations() {
    let d = TempDir::new().unwrap();
    let o = knotfield(
        d.path(),
        &["verify", "--suite", "quantum", "--set", "verify.points=5", "--set", "output.1.kind=correlation", "--set", "output.1.format=csv", "--set", "output.1.path=c.csv"],
    );
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let text = fs::read_to_string(d.path().join("c.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 5 * 6 / 2);
    assert_eq!(text.lines().next().unwrap().split(',').count(), 12);
}

const TRACE_CONF: &str = "\
output.1.kind = trace_summary
output.1.format = json
output.1.path = trace.json
output.2.kind = curve
output.2.format = vtk
output.2.path = curves/line_{i}.vtk
";

#[test]
fn two_hopfion_seeds_link_once() {
    let d = TempDir::new().unwrap();
    write(d.path(), "run.conf", TRACE_CONF);
    write(d.path(), "seeds.csv", "X,Y,Z\n0.5,0,0\n0,-0.7,0.2\n");
    let o = knotfield(d.path(), &["trace", "--config", "run.conf", "--seeds", "seeds.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s: Value = serde_json::from_str(&fs::read_to_string(d.path().join("trace.json")).unwrap()).unwrap();
    assert!(s["seeds"].as_array().unwrap().iter().all(|x| x["closed"] == Value::Bool(true)));
    let m = &s["linking"];
    assert!(m[0][0].is_null() && m[1][1].is_null());
    assert!((m[0][1].as_f64().unwrap() - 1.0).abs() < 0.05);
    assert!((m[1][0].as_f64().unwrap() - 1.0).abs() < 0.05);
    assert!(d.path().join("curves/line_0.vtk").exists() && d.path().join("curves/line_1.vtk").exists());
}

#[test]
fn null_seed_is_recorded_and_the_run_continues() {
    let d = TempDir::new().unwrap();
    write(d.path(), "run.conf", TRACE_CONF);
    write(d.path(), "seeds.csv", "1e6,0,0\n0.5,0,0\n");
    let o = knotfield(d.path(), &["trace", "--config", "run.conf", "--seeds", "seeds.csv"]);
    assert_eq!(code(&o), 0);
    let s: Value = serde_json::from_str(&fs::read_to_string(d.path().join("trace.json")).unwrap()).unwrap();
    assert!(s["seeds"][0]["error"].as_str().unwrap().contains("null threshold"));
    assert_eq!(s["seeds"][1]["closed"], Value::Bool(true));
}

#[test]
fn malformed_seeds_report_the_line() {
    let d = TempDir::new().unwrap();
    write(d.path(), "run.conf", TRACE_CONF);
    write(d.path(), "seeds.csv", "0.5,0,0\n\n0.1,zero,0\n");
    let o = knotfield(d.path(), &["trace", "--config", "run.conf", "--seeds", "seeds.csv"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("seeds.csv:3:"));
}

#[test]
fn normalized_config_is_a_fixed_point() {
    let d = TempDir::new().unwrap();
    write(d.path(), "a.conf", "indices.n = 3\nindices.m = 2\nscales.a = 2.5e-3\ngrid.times = 0,1\n");
    let first = stdout(&knotfield(d.path(), &["config", "--config", "a.conf"]));
    write(d.path(), "b.conf", &first);
    let second = stdout(&knotfield(d.path(), &["config", "--config", "b.conf"]));
    assert_eq!(first, second);
    assert!(first.contains("seed = 42"));
}

#[test]
fn thread_cap_from_environment() {
    let d = TempDir::new().unwrap();
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_knotfield"))
            .current_dir(d.path())
            .env("KNOTFIELD_THREADS", v)
            .args(["verify", "--suite", "maxwell", "--set", "verify.points=50"])
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("1")), 0);
    assert_eq!(code(&run("0")), 2);
}
