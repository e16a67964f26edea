use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn obstruct(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_obstruct")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn entropy_reports_on_stdout() {
    let out = obstruct(&["entropy", "--beta", "2", "--nmax", "12"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["command"], "entropy");
    assert_eq!(r["status"], "pass");
    assert_eq!(r["result"]["counts"][11]["count"], "4096");
}

#[test]
fn missing_beta_is_a_usage_error() {
    assert_eq!(obstruct(&["expand"]).status.code(), Some(2));
    assert_eq!(obstruct(&["entropy", "--beta", "nonsense"]).status.code(), Some(2));
    assert_eq!(obstruct(&["bogus"]).status.code(), Some(2));
}

#[test]
fn entropy_past_the_horizon_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("w.txt");
    std::fs::write(&file, "beta=(1+sqrt(5))/2\n1010101010\n").unwrap();
    let within = obstruct(&["entropy", "--expansion-file", path(&file), "--nmax", "10"]);
    assert_eq!(within.status.code(), Some(0), "{}", String::from_utf8_lossy(&within.stderr));
    let past = obstruct(&["entropy", "--expansion-file", path(&file), "--nmax", "11"]);
    assert_eq!(past.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&past.stderr).contains("horizon"));
    std::fs::write(&file, "1010101010\n").unwrap();
    assert_eq!(obstruct(&["entropy", "--expansion-file", path(&file)]).status.code(), Some(2));
}

#[test]
fn out_dir_holds_report_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = obstruct(&["expand", "--beta", "(1+sqrt(5))/2", "--out", path(dir.path()), "--emit-csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(r["result"]["expansion"], "(10)^∞");
    assert!(dir.path().join("automaton.csv").exists());
    assert!(dir.path().join("counts.csv").exists());
}

#[test]
fn saved_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    let first = obstruct(&["decomp", "--beta", "2", "--op", "coverage", "--nmax", "10", "--write-config", path(&config)]);
    assert_eq!(first.status.code(), Some(0));
    let second = obstruct(&["run", path(&config)]);
    assert_eq!(second.status.code(), Some(0));
    let strip = |o: &Output| obstruct_cli::json::without_timestamp(std::str::from_utf8(&o.stdout).unwrap()).unwrap();
    assert_eq!(strip(&first), strip(&second));
    std::fs::write(&config, "{\"command\": \"entropy\"}").unwrap();
    assert_eq!(obstruct(&["run", path(&config)]).status.code(), Some(2));
}

#[test]
fn corrupt_measure_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("out");
    assert_eq!(obstruct(&["mme", "--beta", "2", "--lengths", "8", "--out", path(&good)]).status.code(), Some(0));
    let parry = std::fs::read_to_string(good.join("parry.json")).unwrap();
    let measure = dir.path().join("m.json");
    std::fs::write(&measure, &parry).unwrap();
    assert_eq!(obstruct(&["mme", "--beta", "2", "--lengths", "8", "--measure", path(&measure)]).status.code(), Some(0));
    std::fs::write(&measure, parry.replacen("\"mass_den\": \"2\"", "\"mass_den\": \"3\"", 1)).unwrap();
    assert_eq!(obstruct(&["mme", "--beta", "2", "--lengths", "8", "--measure", path(&measure)]).status.code(), Some(2));
    std::fs::write(&measure, &parry[..parry.len() / 2]).unwrap();
    assert_eq!(obstruct(&["mme", "--beta", "2", "--lengths", "8", "--measure", path(&measure)]).status.code(), Some(2));
}

#[test]
fn factor_identity_and_thread_cap() {
    let dir = tempfile::tempdir().unwrap();
    let code = dir.path().join("code.txt");
    std::fs::write(&code, "0 -> 0\n1 -> 1\n").unwrap();
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_obstruct"))
            .args(["factor", "--beta", "(1+sqrt(5))/2", "--code", path(&code)])
            .env("OBSTRUCT_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    assert_eq!(one.status.code(), Some(0), "{}", String::from_utf8_lossy(&one.stderr));
    let four = run("4");
    let strip = |o: &Output| obstruct_cli::json::without_timestamp(std::str::from_utf8(&o.stdout).unwrap()).unwrap();
    assert_eq!(strip(&one), strip(&four));
    assert_eq!(run("zero").status.code(), Some(2));
}

#[test]
fn degenerate_scheme_skips_the_gap_checks() {
    let out = obstruct(&["verify", "--beta", "2", "--scheme", "degenerate", "--nmax", "12"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["result"]["hypotheses"]["entropy_gap"], false);
    let gibbs = r["result"]["checks"].as_array().unwrap().iter().find(|c| c["name"] == "gibbs").unwrap();
    assert_eq!(gibbs["status"], "skipped");
}
