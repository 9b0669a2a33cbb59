use std::path::Path;
use std::process::{Command, Output};

fn avstl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_avstl")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn eval_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let trace = write(dir.path(), "v.csv", "time,v\n0,100\n");

    let ok = avstl(&["eval", "--trace", &trace, "--formula", "F[0,10] v >= 80"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(stdout(&ok).trim(), "pos=20 neg=0");
    assert!(String::from_utf8_lossy(&ok.stderr).contains("warning"));

    let bad = avstl(&["eval", "--trace", &trace, "--formula", "G[0,10] v <= 50"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).starts_with("pos=0 "));

    let broken = avstl(&["eval", "--trace", &trace, "--formula", "G[0,10 v <= 50"]);
    assert_eq!(broken.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&broken.stderr).contains("column"));

    let missing = avstl(&["eval", "--trace", "/nonexistent.csv", "--formula", "v >= 0"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn eval_prints_poles_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let trace = write(dir.path(), "v.csv", "time,v\n0,1\n");
    let o = avstl(&["eval", "--trace", &trace, "--formula", "true"]);
    assert_eq!(stdout(&o).trim(), "pos=inf neg=0");
    let o = avstl(&["eval", "--trace", &trace, "--formula", "false", "--json"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), r#"{"pos":0.0,"neg":"-inf"}"#);
}

#[test]
fn formula_sources_are_exclusive() {
    let dir = tempfile::tempdir().unwrap();
    let trace = write(dir.path(), "v.csv", "time,v\n0,1\n");
    let file = write(dir.path(), "f.stl", "G v >= 0\n");
    let o = avstl(&["eval", "--trace", &trace, "--formula-file", &file]);
    assert_eq!(o.status.code(), Some(0));
    let both = avstl(&["eval", "--trace", &trace, "--formula-file", &file, "--formula", "v >= 0"]);
    assert_eq!(both.status.code(), Some(2));
    let neither = avstl(&["eval", "--trace", &trace]);
    assert_eq!(neither.status.code(), Some(2));
}

#[test]
fn signal_export_and_dump() {
    let dir = tempfile::tempdir().unwrap();
    let trace = write(dir.path(), "a.csv", "time,airbag\n0,-1\n0.5,1\n");
    let o = avstl(&["signal", "--trace", &trace, "--formula", "AvF[0,1] airbag"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("time,pos,pos_slope,neg,neg_slope\n0,0.5,1,-0.5,1\n0.5,1,0,0,0\n"), "{text}");

    let dump = dir.path().join("sig.csv");
    let o = avstl(&[
        "eval",
        "--trace",
        &trace,
        "--formula",
        "AvF[0,1] airbag",
        "--dump-signal",
        dump.to_str().unwrap(),
    ]);
    assert_eq!(stdout(&o).trim(), "pos=0.5 neg=-0.5");
    assert_eq!(std::fs::read_to_string(&dump).unwrap(), text);
}

#[test]
fn oracle_check_runs_and_is_reproducible() {
    let zero = avstl(&["oracle-check", "--count", "0"]);
    assert_eq!(zero.status.code(), Some(0));
    let a = avstl(&["oracle-check", "--count", "50", "--seed", "3"]);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert!(stdout(&a).contains("50 instances, 0 mismatches"));
    let x = avstl::cli::instances(30, 4, 50, 3);
    let y = avstl::cli::instances(30, 4, 50, 3);
    assert!(x.iter().zip(&y).all(|(p, q)| p.formula == q.formula && p.trace == q.trace));
}

#[test]
fn bench_table() {
    let one = avstl(&["bench", "--sizes", "200", "--repetitions", "1"]);
    assert_eq!(one.status.code(), Some(0));
    let text = stdout(&one);
    assert_eq!(text.lines().count(), 2, "{text}");
    let two = avstl(&["bench", "--sizes", "200,400", "--repetitions", "3"]);
    assert!(stdout(&two).contains("fitted exponent"));
    let none = avstl(&["bench", "--sizes", "200", "--repetitions", "0"]);
    assert_eq!(none.status.code(), Some(2));
}

#[test]
fn falsify_writes_table_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/config/gear_experiment.json");
    let report = dir.path().join("report.json");
    let o = avstl(&["falsify", "--config", cfg, "--trials", "3", "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let table = stdout(&o);
    assert!(table.lines().next().unwrap().contains("succ."));
    assert!(table.contains("/3"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(json["problems"][0]["plain"]["trials"], 3);
}

#[test]
fn help_lists_subcommands() {
    let o = avstl(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    for cmd in ["eval", "signal", "oracle-check", "bench", "falsify"] {
        assert!(stdout(&o).contains(cmd));
    }
}
