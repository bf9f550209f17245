use std::path::PathBuf;
use std::process::{Command, Output};

use jsonschema::{Draft, JSONSchema};
use serde_json::Value;

fn jumploci(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jumploci"))
        .args(args)
        .env_remove("JUMPLOCI_THREADS")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn schema() -> JSONSchema {
    let raw: Value = serde_json::from_str(jumploci::report::SCHEMA).unwrap();
    JSONSchema::options()
        .with_draft(Draft::Draft202012)
        .compile(&raw)
        .expect("schema compiles")
}

fn assert_valid(v: &Value) {
    let s = schema();
    if let Err(errors) = s.validate(v) {
        let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("report does not validate:\n{}", msgs.join("\n"));
    };
}

fn expected_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/corpus/expected")
}

#[test]
fn ng_on_genus_two_surface() {
    let out = jumploci(&["ng", "surface2", "--g", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    assert_eq!(v["result"]["N_g"], 1);
    assert_eq!(v["config"]["g"], 2);
    assert_eq!(v["seed"], 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("N_2 = 1"));
    assert_valid(&v);
}

#[test]
fn orbit_of_a_real_character() {
    let out = jumploci(&["orbit", "--moduli", "4,2", "--angles", "0,0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    assert_eq!(v["result"]["dim"], 1);
    assert_eq!(v["result"]["H"], serde_json::json!([[1, -2]]));
    assert_valid(&v);
}

#[test]
fn refusals_exit_two_with_a_report() {
    for args in [
        vec!["thm4", "free2"],
        vec!["weights", "surface2"],
        vec!["weights", "z2", "--N", "3"],
        vec!["analyze", "z3_plus_z", "--i", "2"],
        vec!["analyze", "surface2_x_surface3"],
    ] {
        let out = jumploci(&args);
        assert_eq!(out.status.code(), Some(2), "{:?}", args);
        let v = report(&out);
        assert!(v["refusal"].is_string(), "{:?}", args);
        assert!(v["result"].is_null());
        assert_valid(&v);
    }
}

#[test]
fn bad_input_exits_one() {
    let missing = jumploci(&["analyze", "/nonexistent/group.json"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(missing.stdout.is_empty());

    let bad_rational = jumploci(&["orbit", "--moduli", "x,1", "--angles", "0,0"]);
    assert_eq!(bad_rational.status.code(), Some(1));

    let usage = jumploci(&["ng", "surface2"]);
    assert_eq!(usage.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, r#"{"generators": ["a"], "relators": ["ab"]}"#).unwrap();
    let unknown = jumploci(&["analyze", path.to_str().unwrap()]);
    assert_eq!(unknown.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("error"));
}

#[test]
fn every_command_validates() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    std::fs::write(&model, r#"{"n": 1, "period": [[["1", "0"]], [["1/2", "1"]]]}"#).unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["analyze", "trefoil", "--numeric-fallback", "--samples", "20"],
        vec!["analyze", "surface2", "--K", "3"],
        vec!["certify", "surface2", "--lattice", "1,0,0,0;0,1,0,0;0,0,1,0;0,0,0,1"],
        vec!["certify", "z2", "--lattice", "1,0", "--angles", "0,1/2"],
        vec!["cover", "orbifold"],
        vec!["cover", "surface2_x_z2", "--K", "2"],
        vec!["cover", "z2"],
        vec!["orbit", "--moduli", "1,1", "--angles", "1/3,0", "--variant", "A"],
        vec!["weights", "trefoil"],
        vec!["weights", "z3_plus_z", "--N", "1"],
        vec!["thm4", "z3_plus_z"],
        vec!["thm4", "trefoil"],
        vec!["higgs", "verify-thm3", "--n", "1", "--samples", "10"],
        vec![
            "higgs",
            "verify-thm3",
            "--n",
            "1",
            "--samples",
            "10",
            "--model",
            model.to_str().unwrap(),
        ],
    ];
    for args in runs {
        let out = jumploci(&args);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{:?}: {}",
            args,
            String::from_utf8_lossy(&out.stderr)
        );
        let v = report(&out);
        assert_eq!(v["tool"], "jumploci");
        assert_valid(&v);
    }
}

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    let args = [
        "analyze",
        "surface2",
        "--numeric-fallback",
        "--samples",
        "50",
        "--seed",
        "7",
    ];
    let first = jumploci(&args);
    let second = jumploci(&args);
    assert_eq!(first.stdout, second.stdout);
    for threads in ["1", "3"] {
        let out = Command::new(env!("CARGO_BIN_EXE_jumploci"))
            .args(args)
            .env("JUMPLOCI_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(out.stdout, first.stdout, "threads = {}", threads);
    }
    assert_eq!(report(&first)["seed"], 7);
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = jumploci(&[
        "ng",
        "surface3",
        "--g",
        "3",
        "--K",
        "3",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["result"]["N_g"], 1);
    assert_eq!(v["config"]["output"], path.to_str().unwrap());
}

#[test]
fn corpus_reports_match_fixtures() {
    let mut checked = 0;
    for entry in std::fs::read_dir(expected_dir()).unwrap() {
        let path = entry.unwrap().path();
        let fixture = std::fs::read_to_string(&path).unwrap();
        let v: Value = serde_json::from_str(&fixture).unwrap();
        let mut args = vec![v["command"].as_str().unwrap().to_string()];
        args.push(v["config"]["input"].as_str().unwrap().to_string());
        args.push("--K".into());
        args.push(v["config"]["K"].to_string());
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = jumploci(&argv);
        assert_eq!(String::from_utf8(out.stdout).unwrap(), fixture, "{}", path.display());
        checked += 1;
    }
    assert!(checked >= 13);
}
