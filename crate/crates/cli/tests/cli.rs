use std::path::Path;
use std::process::{Command, Output};

fn dykstra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dykstra"))
        .args(args)
        .env_remove("DYKSTRA_OUT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const EMPTY_CHECKS: &str = r#"{
  "version": 1,
  "name": "plain",
  "family": {"sets": [
    {"type": "halfspace", "a": [1, 0], "beta": 0},
    {"type": "ball", "center": [0, 0], "radius": 1}
  ]},
  "x0": [2, 1],
  "steps": 20
}"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn rate_examples() {
    let o = dykstra(&["rates", "psi", "--B", "1", "--eps", "1/2", "--f", "0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "2");

    let o = dykstra(&["rates", "phi", "--B", "1", "--m", "2", "--eps", "3", "--N", "0"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("3\n"), "{}", stdout(&o));

    let o = dykstra(&["rates", "beta", "--b", "1", "--eps", "2", "--delta", "x"]);
    assert_eq!(stdout(&o).trim(), "1/13824");

    let o = dykstra(&["rates", "kappa", "--b", "1", "--n", "50", "--eps", "1/10"]);
    assert_eq!(stdout(&o).trim(), "1/20000");
}

#[test]
fn capped_rates_say_so_and_succeed() {
    let o = dykstra(&["rates", "gamma", "--b", "1", "--m", "2", "--eps", "1", "--Delta", "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("≥ 10^30 (capped)"), "{}", stdout(&o));
}

#[test]
fn bad_rate_input_is_a_usage_error() {
    let o = dykstra(&["rates", "psi", "--B", "1", "--eps", "1/0", "--f", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = dykstra(&["rates", "psi", "--B", "1", "--eps", "1/2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--f"), "{}", stderr(&o));
}

#[test]
fn empty_check_list_runs_clean() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "plain.json", EMPTY_CHECKS);
    let out = tmp.path().join("out");
    let o = dykstra(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    for f in ["trace.jsonl", "series.csv", "reports.json"] {
        assert!(out.join("plain").join(f).is_file(), "{f} missing");
    }
    let trace = std::fs::read_to_string(out.join("plain/trace.jsonl")).unwrap();
    assert_eq!(trace.lines().count(), 21);
}

#[test]
fn config_errors_report_their_line() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = EMPTY_CHECKS.replace("\"steps\": 20", "\"steps\": 20,\n  \"stpes\": 1");
    let cfg = write(tmp.path(), "bad.json", &bad);
    let o = dykstra(&["run", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 10"), "{}", stderr(&o));
}

#[test]
fn infeasible_witness_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = EMPTY_CHECKS.replace("]},", "], \"witness\": [5, 5]},");
    let cfg = write(tmp.path(), "w.json", &bad);
    let o = dykstra(&["run", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
}

#[test]
fn verify_and_report_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let o = dykstra(&["scenario", "twolines"]);
    assert!(o.status.success());
    let cfg = write(tmp.path(), "twolines.json", &stdout(&o));
    let out = tmp.path().join("out");
    let o = dykstra(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let trace = out.join("twolines/trace.jsonl");
    let o = dykstra(&["verify", trace.to_str().unwrap(), &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("exact"), "{}", stdout(&o));

    let o = dykstra(&["report", out.join("twolines").to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("affine_reduction"), "{}", stdout(&o));

    // A tampered trace no longer replays.
    let text = std::fs::read_to_string(&trace).unwrap();
    let tampered: Vec<String> = text
        .lines()
        .enumerate()
        .map(|(i, l)| if i == 5 { l.replacen("e-1", "e-2", 1) } else { l.to_string() })
        .collect();
    let bad = write(tmp.path(), "tampered.jsonl", &(tampered.join("\n") + "\n"));
    let o = dykstra(&["verify", &bad, &cfg]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

#[test]
fn unknown_scenario_fails() {
    let o = dykstra(&["run", "--scenario", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn out_dir_comes_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "plain.json", EMPTY_CHECKS);
    let o = Command::new(env!("CARGO_BIN_EXE_dykstra"))
        .args(["run", &cfg])
        .env("DYKSTRA_OUT", tmp.path().join("env"))
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(tmp.path().join("env/plain/reports.json").is_file());
}
