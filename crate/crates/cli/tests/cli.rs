use std::fs;
use std::process::{Command, Output};

fn spinalloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinalloc")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn generate_then_measure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = spinalloc(&["generate", "--model", "er", "--stations", "30", "--seed", "4", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let graph = dir.path().join("graph.txt");
    assert!(fs::read_to_string(&graph).unwrap().starts_with("spinalloc-graph v1 n=30\n"));

    let o = spinalloc(&["hyperbolicity", "--graph", graph.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("delta=") && text.contains("components=") && text.contains("diameter="));
}

#[test]
fn solve_prints_allocation() {
    let o = spinalloc(&["solve", "--model", "geo", "--stations", "20", "--mu-dbm", "-80", "--pools", "3", "--solver", "pmnf"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("station,pool"));
    assert!(lines.all(|l| l.split(',').nth(1).unwrap().parse::<usize>().is_ok_and(|p| (1..=3).contains(&p))));
}

#[test]
fn experiment_from_config_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"model":"er","i_values":[20,30],"q_values":[3],"z":3,"master_seed":5,"solvers":["sp","mnf"],"out_dir":"ignored"}"#,
    )
    .unwrap();
    let out = dir.path().join("res");
    let o = spinalloc(&[
        "experiment",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--solver",
        "random",
        "--solver",
        "bp",
        "--seed",
        "8",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let records = fs::read_to_string(out.join("records.csv")).unwrap();
    // 2 station counts x 1 pool count x 3 realizations x 2 solvers
    assert_eq!(records.lines().count(), 12 + 1);
    assert!(records.lines().skip(1).all(|l| l.contains(",random,") || l.contains(",bp,")));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4 + 1);
    assert!(out.join("figures.gp").exists());
}

#[test]
fn rejects_unknown_names() {
    assert!(!spinalloc(&["solve", "--solver", "dsatur", "--stations", "5"]).status.success());
    assert!(!spinalloc(&["generate", "--model", "ba"]).status.success());
    assert!(!spinalloc(&["experiment", "--z", "0", "--out", "/nonexistent/never"]).status.success());
}
