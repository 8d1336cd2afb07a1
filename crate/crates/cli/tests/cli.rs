//! End-to-end checks of the binary's contracts.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn navbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_navbench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_dir_sorted(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    v.sort();
    v
}

#[test]
fn generate_is_deterministic_byte_for_byte() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        let out = navbench(&[
            "generate",
            "--count",
            "3",
            "--seed",
            "1",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let files_a = read_dir_sorted(&a);
    let files_b = read_dir_sorted(&b);
    assert_eq!(files_a.len(), files_b.len());
    assert_eq!(files_a.len(), 4); // 3 worlds + manifest
    for (fa, fb) in files_a.iter().zip(&files_b) {
        assert_eq!(std::fs::read(fa).unwrap(), std::fs::read(fb).unwrap());
    }
}

#[test]
fn generate_into_unwritable_dir_fails_without_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let blocked = tmp.path().join("blocked");
    // a plain file where the directory should go
    std::fs::write(&blocked, b"not a dir").unwrap();
    let out = navbench(&[
        "generate",
        "--count",
        "2",
        "--seed",
        "1",
        "--out",
        blocked.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(!blocked.join("manifest.json").exists());
}

#[test]
fn generate_difficulty_filter_writes_subset() {
    let tmp = tempfile::tempdir().unwrap();
    let all = tmp.path().join("all");
    let easy = tmp.path().join("easy");
    assert!(navbench(&["generate", "--count", "9", "--seed", "3", "--out", all.to_str().unwrap()])
        .status
        .success());
    assert!(navbench(&[
        "generate",
        "--count",
        "9",
        "--seed",
        "3",
        "--difficulty",
        "easy",
        "--out",
        easy.to_str().unwrap(),
    ])
    .status
    .success());
    let manifest_all: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(all.join("manifest.json")).unwrap()).unwrap();
    let manifest_easy: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(easy.join("manifest.json")).unwrap()).unwrap();
    let n_all = manifest_all["worlds"].as_array().unwrap().len();
    let n_easy = manifest_easy["worlds"].as_array().unwrap().len();
    assert_eq!(n_all, 9);
    assert!(n_easy == 3, "terciles of 9 should keep 3, got {n_easy}");
    for w in manifest_easy["worlds"].as_array().unwrap() {
        assert_eq!(w["difficulty"], "easy");
    }
}

#[test]
fn run_executes_and_jobs_do_not_change_records() {
    let tmp = tempfile::tempdir().unwrap();
    let worlds = tmp.path().join("worlds");
    assert!(navbench(&["generate", "--count", "3", "--seed", "11", "--out", worlds.to_str().unwrap()])
        .status
        .success());
    let r1 = tmp.path().join("r1");
    let r4 = tmp.path().join("r4");
    for (dir, jobs) in [(&r1, "1"), (&r4, "4")] {
        let out = navbench(&[
            "run",
            "--worlds",
            worlds.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
            "--trials",
            "2",
            "--safety",
            "fi",
            "--jobs",
            jobs,
            "--seed",
            "7",
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(
        std::fs::read(r1.join("records.json")).unwrap(),
        std::fs::read(r4.join("records.json")).unwrap()
    );
}

#[test]
fn score_prints_aggregate_and_md_table() {
    let tmp = tempfile::tempdir().unwrap();
    let worlds = tmp.path().join("worlds");
    let results = tmp.path().join("results");
    assert!(navbench(&["generate", "--count", "2", "--seed", "21", "--out", worlds.to_str().unwrap()])
        .status
        .success());
    assert!(navbench(&[
        "run",
        "--worlds",
        worlds.to_str().unwrap(),
        "--out",
        results.to_str().unwrap(),
        "--trials",
        "1",
    ])
    .status
    .success());
    let out = navbench(&[
        "score",
        "--results",
        results.to_str().unwrap(),
        "--format",
        "md",
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("| Rank | Method | Score |"));
    assert!(stdout.contains("aggregate[pursuit+fi]"));
    assert!(results.join("report.md").exists());
    assert!(results.join("report.csv").exists());
}

#[test]
fn score_on_missing_results_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let out = navbench(&["score", "--results", tmp.path().to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn score_fixture_records_average_correctly() {
    // Three trials at 0.25 (floor clip), 0.125 (ceiling clip), and 0
    // (collision): the environment mean is 0.125.
    let tmp = tempfile::tempdir().unwrap();
    let records = serde_json::json!([
        {"world_id": "w0", "trial_index": 0, "outcome": "success", "actual_time": 10.0,
         "optimal_time": 5.0, "seed": 0, "trace_path": "", "fsm_summary": {},
         "loop_detected": false, "transitions": []},
        {"world_id": "w0", "trial_index": 1, "outcome": "success", "actual_time": 50.0,
         "optimal_time": 5.0, "seed": 0, "trace_path": "", "fsm_summary": {},
         "loop_detected": false, "transitions": []},
        {"world_id": "w0", "trial_index": 2, "outcome": "collision", "actual_time": 3.0,
         "optimal_time": 5.0, "seed": 0, "trace_path": "", "fsm_summary": {},
         "loop_detected": false, "transitions": []}
    ]);
    std::fs::write(
        tmp.path().join("records.json"),
        serde_json::to_string_pretty(&records).unwrap(),
    )
    .unwrap();
    let out = navbench(&["score", "--results", tmp.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("0.125000"), "stdout:\n{stdout}");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    std::fs::write(&cfg, r#"{"trials": 2, "warp_speed": 9}"#).unwrap();
    let worlds = tmp.path().join("worlds");
    assert!(navbench(&["generate", "--count", "1", "--seed", "1", "--out", worlds.to_str().unwrap()])
        .status
        .success());
    let out = navbench(&[
        "run",
        "--worlds",
        worlds.to_str().unwrap(),
        "--out",
        tmp.path().join("r").to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warp_speed"));
}

#[test]
fn batch_rerun_reproduces_aggregate_across_jobs() {
    let tmp = tempfile::tempdir().unwrap();
    let mut aggregates = Vec::new();
    for (name, jobs) in [("b1", "1"), ("b2", "3"), ("b3", "1")] {
        let dir = tmp.path().join(name);
        let out = navbench(&[
            "batch",
            "--count",
            "3",
            "--seed",
            "99",
            "--trials",
            "2",
            "--jobs",
            jobs,
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let stdout = String::from_utf8(out.stdout).unwrap();
        let aggregate = stdout
            .lines()
            .rev()
            .find(|l| l.starts_with("aggregate"))
            .unwrap()
            .to_string();
        aggregates.push(aggregate);
    }
    assert_eq!(aggregates[0], aggregates[1]);
    assert_eq!(aggregates[0], aggregates[2]);
}

#[test]
fn env_override_sits_between_flag_and_default() {
    let tmp = tempfile::tempdir().unwrap();
    let worlds = tmp.path().join("w");
    assert!(navbench(&["generate", "--count", "1", "--seed", "1", "--out", worlds.to_str().unwrap()])
        .status
        .success());
    // env only
    let out = Command::new(env!("CARGO_BIN_EXE_navbench"))
        .args([
            "run",
            "--worlds",
            worlds.to_str().unwrap(),
            "--out",
            tmp.path().join("x").to_str().unwrap(),
            "--print-config",
        ])
        .env("NAVBENCH_TRIALS", "7")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["trials"], 7);
    // flag beats env
    let out = Command::new(env!("CARGO_BIN_EXE_navbench"))
        .args([
            "run",
            "--worlds",
            worlds.to_str().unwrap(),
            "--out",
            tmp.path().join("y").to_str().unwrap(),
            "--trials",
            "2",
            "--print-config",
        ])
        .env("NAVBENCH_TRIALS", "7")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["trials"], 2);
}

#[test]
fn safety_none_records_collision_and_exits_zero() {
    // Seed 8051 is a course where the bare pursuit baseline collides.
    let tmp = tempfile::tempdir().unwrap();
    let worlds = tmp.path().join("worlds");
    let results = tmp.path().join("results");
    assert!(navbench(&["generate", "--count", "1", "--seed", "8051", "--out", worlds.to_str().unwrap()])
        .status
        .success());
    let out = navbench(&[
        "run",
        "--worlds",
        worlds.to_str().unwrap(),
        "--out",
        results.to_str().unwrap(),
        "--trials",
        "1",
        "--safety",
        "none",
    ]);
    assert!(out.status.success(), "collisions are results, not errors");
    let records: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(results.join("records.json")).unwrap())
            .unwrap();
    assert_eq!(records[0]["outcome"], "collision");
}

#[test]
fn score_regeneration_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let worlds = tmp.path().join("worlds");
    let results = tmp.path().join("results");
    assert!(navbench(&["generate", "--count", "2", "--seed", "5", "--out", worlds.to_str().unwrap()])
        .status
        .success());
    assert!(navbench(&[
        "run",
        "--worlds",
        worlds.to_str().unwrap(),
        "--out",
        results.to_str().unwrap(),
        "--trials",
        "2",
    ])
    .status
    .success());
    assert!(navbench(&["score", "--results", results.to_str().unwrap()]).status.success());
    let first_csv = std::fs::read(results.join("report.csv")).unwrap();
    let first_md = std::fs::read(results.join("report.md")).unwrap();
    assert!(navbench(&["score", "--results", results.to_str().unwrap()]).status.success());
    assert_eq!(first_csv, std::fs::read(results.join("report.csv")).unwrap());
    assert_eq!(first_md, std::fs::read(results.join("report.md")).unwrap());
}

#[test]
fn dump_costmap_writes_pgm() {
    let tmp = tempfile::tempdir().unwrap();
    let worlds = tmp.path().join("worlds");
    let results = tmp.path().join("results");
    assert!(navbench(&["generate", "--count", "1", "--seed", "2", "--out", worlds.to_str().unwrap()])
        .status
        .success());
    assert!(navbench(&[
        "run",
        "--worlds",
        worlds.to_str().unwrap(),
        "--out",
        results.to_str().unwrap(),
        "--trials",
        "1",
        "--dump-costmap",
    ])
    .status
    .success());
    let pgm = std::fs::read(results.join("costmaps/w000_t0.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n"));
}
