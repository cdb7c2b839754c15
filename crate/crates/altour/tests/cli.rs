use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn altour(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_altour")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn gen_bench_check_render_report() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    assert!(altour(&["gen", "--n", "4", "--count", "3", "--seed", "2", "--out", "data.csv"], d).status.success());
    let o = altour(&["bench", "--data", "data.csv", "--out-results", "updated_experiment_n_4_results.csv", "--time-limit", "10"], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.join("img_update4/experiment_1000.svg").exists());
    assert!(d.join("updated_experiment_n_4_results_stats.csv").exists());
    let o = altour(&["check", "--data", "data.csv", "--results", "updated_experiment_n_4_results.csv"], d);
    assert!(o.status.success());
    assert_eq!(stdout(&o).matches(" ok").count(), 3);
    let o = altour(
        &["render", "--data", "data.csv", "--results", "updated_experiment_n_4_results.csv", "--experiment", "1001", "--out", "t.svg"],
        d,
    );
    assert!(o.status.success());
    assert!(fs::read_to_string(d.join("t.svg")).unwrap().contains("Experiment 1001 cost"));
    let o = altour(&["report", "--results", "updated_experiment_n_4_results.csv", "--csv", "rep.csv"], d);
    assert!(o.status.success());
    assert!(fs::read_to_string(d.join("rep.csv")).unwrap().lines().nth(1).unwrap().starts_with("4,3,3,"));
}

#[test]
fn solve_export_and_external_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    altour(&["gen", "--n", "5", "--count", "1", "--seed", "8", "--out", "data.csv"], d);
    let solved = stdout(&altour(&["solve", "--data", "data.csv", "--experiment", "1000"], d));
    let cost = |s: &str| s.lines().find(|l| l.starts_with("best_cost")).unwrap().split_whitespace().nth(1).unwrap().to_string();
    assert!(solved.contains("status     optimal"));
    let cmd = format!("'{}' lp-solve --method exact {{lp}}", env!("CARGO_BIN_EXE_altour"));
    let o = altour(&["external", "--data", "data.csv", "--experiment", "1000", "--solver-cmd", &cmd, "--workdir", "rounds"], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(cost(&stdout(&o)), cost(&solved));
    assert!(d.join("rounds/round_1.lp").exists());
    let o = altour(&["export-lp", "--data", "data.csv", "--experiment", "1000", "--model", "generalized", "--out", "g.lp"], d);
    assert!(o.status.success());
    let lp = fs::read_to_string(d.join("g.lp")).unwrap();
    assert!(lp.contains("anti_0_5:") && lp.contains("fix_x_9_4: x_9_4 = 0"));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    assert_eq!(altour(&["solve", "--data", "missing.csv", "--experiment", "1"], d).status.code(), Some(4));
    fs::write(d.join("bad.csv"), "a,b\n1,2\n").unwrap();
    assert_eq!(altour(&["bench", "--data", "bad.csv", "--out-results", "r.csv"], d).status.code(), Some(4));
    // both "b" items must go to the single "b" placeholder
    fs::write(d.join("data.csv"), "Experiment,ID,pX,pY,tX,tY\n1,0,0,0,1,1\n1,1,1,0,0,1\n1,2,2,0,2,1\n").unwrap();
    fs::write(d.join("types.csv"), "Experiment,ID,pType,tType\n1,0,a,a\n1,1,b,b\n1,2,b,a\n").unwrap();
    let o = altour(&["solve", "--data", "data.csv", "--types", "types.csv", "--experiment", "1", "--model", "generalized"], d);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
    fs::write(d.join("types.csv"), "Experiment,ID,pType,tType\n1,0,a,b\n1,1,b,b\n1,2,b,a\n").unwrap();
    let o = altour(&["solve", "--data", "data.csv", "--types", "types.csv", "--experiment", "1", "--model", "generalized"], d);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(altour(&["solve", "--data", "data.csv", "--experiment", "9"], d).status.code(), Some(4));
}
