use std::path::Path;
use std::process::{Command, Output};

fn subadd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subadd")).args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_then_solve_mst() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.json");
    let out = subadd(&["--seed", "3", "gen", "--n", "40", "--out", path(&pts)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let sol = dir.path().join("mst.json");
    let out = subadd(&["solve", "--functional", "mst", "--in", path(&pts), "--out", path(&sol)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    assert_eq!(v["edges"].as_array().unwrap().len(), 39);
    let printed: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert_eq!(printed, v["length"].as_f64().unwrap());
}

#[test]
fn solve_matches_oracle_on_small_input() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.json");
    assert!(subadd(&["--seed", "9", "gen", "--n", "8", "--out", path(&pts)]).status.success());
    for f in ["tsp", "mm", "tf"] {
        let a = subadd(&["solve", "--functional", f, "--in", path(&pts)]);
        let b = subadd(&["oracle", "--functional", f, "--in", path(&pts)]);
        assert!(a.status.success() && b.status.success(), "{f}");
        let a: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
        let b: serde_json::Value = serde_json::from_slice(&b.stdout).unwrap();
        let (x, y) = (a["length"].as_f64().unwrap(), b["length"].as_f64().unwrap());
        assert!((x - y).abs() <= 1e-9 * y.max(1.0), "{f}: {x} vs {y}");
    }
}

#[test]
fn hk_check_reports_cut() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("frac.json");
    let body = r#"{"n":6,"edges":[[0,1,1],[1,2,1],[0,2,1],[3,4,1],[4,5,1],[3,5,1]]}"#;
    std::fs::write(&sol, body).unwrap();
    let out = subadd(&["hk-check", "--in", path(&sol)]);
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["feasible"], false);
    assert_eq!(v["violation"]["kind"], "cut");
    assert_eq!(v["violation"]["crossingWeight"].as_f64(), Some(0.0));

    let ok = r#"{"n":4,"edges":[[0,1,1],[1,2,1],[2,3,1],[0,3,1]]}"#;
    std::fs::write(&sol, ok).unwrap();
    let out = subadd(&["hk-check", "--in", path(&sol)]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn separate_is_deterministic() {
    let run = || subadd(&["--seed", "5", "separate", "--n", "8", "--trials", "6"]);
    let (a, b) = (run(), run());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let other = subadd(&["--seed", "5", "--jobs", "1", "separate", "--n", "8", "--trials", "6"]);
    assert_eq!(a.stdout, other.stdout);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(subadd(&["gen", "--n", "5", "--bogus"]).status.code(), Some(1));
    assert_eq!(subadd(&["solve", "--functional", "nope", "--in", "/nonexistent"]).status.code(), Some(1));
    assert_eq!(subadd(&["--help"]).status.code(), Some(0));
}

#[test]
fn bnb_budget_exhaustion_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.json");
    assert!(subadd(&["--seed", "1", "gen", "--n", "14", "--out", path(&pts)]).status.success());
    let full = subadd(&["bnb", "--in", path(&pts)]);
    assert!(full.status.success(), "{}", String::from_utf8_lossy(&full.stderr));
    let v: serde_json::Value = serde_json::from_slice(&full.stdout).unwrap();
    assert_eq!(v["optimal"], true);
    let oracle = subadd(&["oracle", "--functional", "tsp", "--in", path(&pts)]);
    let o: serde_json::Value = serde_json::from_slice(&oracle.stdout).unwrap();
    assert!((v["length"].as_f64().unwrap() - o["length"].as_f64().unwrap()).abs() < 1e-9);

    let mut starved_seen = false;
    for seed in 0..20 {
        let seed = seed.to_string();
        assert!(subadd(&["--seed", &seed, "gen", "--n", "16", "--out", path(&pts)]).status.success());
        let out = subadd(&["bnb", "--in", path(&pts), "--budget", "1"]);
        match out.status.code() {
            Some(0) => continue,
            Some(2) => {
                let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
                assert_eq!(v["optimal"], false);
                assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
                starved_seen = true;
                break;
            }
            c => panic!("unexpected exit {c:?}"),
        }
    }
    assert!(starved_seen);
}
