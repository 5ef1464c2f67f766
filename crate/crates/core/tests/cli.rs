use std::path::Path;
use std::process::{Command, Output};

fn larrt(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_larrt"))
        .args(args)
        .env("LARRT_OUT_DIR", out_dir)
        .output()
        .expect("run larrt")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn plan_toy_reports_two_actions_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let o = larrt(&["plan", "--scenario", "fig3-toy", "--budget-s", "1"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("solved actions=2 "), "{}", stdout(&o));
    let path = dir.path().join("fig3-toy-larrt-0.path");
    assert!(dir.path().join("fig3-toy-larrt-0.summary.txt").exists());

    let v = larrt(&["verify", "--scenario", "fig3-toy", "--path", path.to_str().unwrap()], dir.path());
    assert!(v.status.success());
    assert!(stdout(&v).starts_with("ok actions=2 "));
}

#[test]
fn plan_start_in_goal_is_free() {
    let dir = tempfile::tempdir().unwrap();
    for planner in ["larrt", "rrtstar", "rrtconnect"] {
        let o = larrt(&["plan", "--scenario", "start-in-goal", "--planner", planner], dir.path());
        assert!(o.status.success());
        assert!(stdout(&o).contains("solved actions=0 additive=0 dist=0.000000"), "{planner}");
    }
}

#[test]
fn bad_scenario_file_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let text = larrt::scenario::builtin_source("fig3-toy").unwrap().replace("  [1],\n", "  [0, 1],\n");
    let file = dir.path().join("broken.toml");
    std::fs::write(&file, text).unwrap();
    let o = larrt(&["plan", "--scenario", file.to_str().unwrap()], dir.path());
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("broken.toml:14:"), "{err}");
    assert!(err.contains("index 0 appears in factor 0 and factor 1"), "{err}");
}

#[test]
fn unknown_planner_and_unwritable_out_dir_fail() {
    let dir = tempfile::tempdir().unwrap();
    let o = larrt(&["plan", "--scenario", "fig3-toy", "--planner", "bitstar"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("unknown planner `bitstar`"));

    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let o = larrt(&["plan", "--scenario", "fig3-toy", "--out-dir", blocker.join("sub").to_str().unwrap()], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("error:"));
}

#[test]
fn verify_names_the_offending_edge_and_goal_misses() {
    let dir = tempfile::tempdir().unwrap();
    let through_wall = dir.path().join("wall.path");
    // The cube drives through the blocker.
    std::fs::write(&through_wall, "larrt-path 1\ndim 2\ns 0 0\ne 0\ns 3 0\n").unwrap();
    let o = larrt(&["verify", "--scenario", "fig3-toy", "--path", through_wall.to_str().unwrap()], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("edge 0 is in collision"), "{}", stderr(&o));

    let truncated = dir.path().join("short.path");
    std::fs::write(&truncated, "larrt-path 1\ndim 2\ns 0 0\ne 1\ns 0 1\n").unwrap();
    let o = larrt(&["verify", "--scenario", "fig3-toy", "--path", truncated.to_str().unwrap()], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("goal miss"));
}

#[test]
fn defrag_reports_before_and_after() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("aba.path");
    // Cube to 1, blocker up, blocker down, blocker up, cube to the goal.
    std::fs::write(&p, "larrt-path 1\ndim 2\ns 0 0\ne 0\ns 1 0\ne 1\ns 1 1\ne 1\ns 1 0\ne 1\ns 1 1\ne 0\ns 3 1\n").unwrap();
    let o = larrt(&["defrag", "--scenario", "fig3-toy", "--path", p.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("before actions=3 additive=5"), "{text}");
    assert!(text.contains("after  actions=2 "), "{text}");
    let out = dir.path().join("aba.defrag.path");
    let v = larrt(&["verify", "--scenario", "fig3-toy", "--path", out.to_str().unwrap()], dir.path());
    assert!(v.status.success());
}

#[test]
fn oracle_and_list() {
    let dir = tempfile::tempdir().unwrap();
    let o = larrt(&["oracle", "--scenario", "fig3-toy"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("oracle actions=2 "));
    let l = larrt(&["list-scenarios"], dir.path());
    let text = stdout(&l);
    for name in larrt::scenario::builtin_names() {
        assert!(text.contains(name));
    }
}

#[test]
fn bench_single_trial_writes_one_row_and_a_plot() {
    let dir = tempfile::tempdir().unwrap();
    let o = larrt(
        &["bench", "--scenario", "fig3-toy", "--planner", "larrt", "--trials", "1", "--budget-s", "0.5"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "scenario,planner,seed,success,time_to_first_s,actions,additive,dist,trace");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("fig3-toy,larrt,0,true,"));
    assert!(dir.path().join("fig3-toy.svg").exists());
}

#[test]
fn virtual_clock_bench_is_byte_identical() {
    let run = |parallel: &str| {
        let dir = tempfile::tempdir().unwrap();
        let o = larrt(
            &[
                "bench", "--scenario", "fig3-toy", "--scenario", "maze-vertical", "--planner", "larrt", "--planner",
                "rrtconnect", "--trials", "3", "--seed", "5", "--budget-s", "0.5", "--virtual-clock", "2000",
                "--parallel", parallel,
            ],
            dir.path(),
        );
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(dir.path().join("bench.csv")).unwrap()
    };
    let a = run("1");
    assert_eq!(a, run("1"));
    assert_eq!(a, run("2"));
}
