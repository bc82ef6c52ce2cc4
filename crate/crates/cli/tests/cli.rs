use std::process::{Command, Output};

use serde_json::Value;

fn cbnorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbnorm"))
        .args(args)
        .env_remove("CBNORM_SEED")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn close(v: &Value, want: f64, tol: f64) -> bool {
    (v.as_f64().unwrap() - want).abs() < tol
}

#[test]
fn transpose_is_not_a_complete_isometry() {
    let out = cbnorm(&["certify-isometry", "--map", "transpose:3"]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert_eq!(r["status"], "fail");
    assert_eq!(r["result"]["verdict"], false);
    assert_eq!(r["config"]["tol"], 1e-7);
    assert_eq!(r["config"]["seed"], 0);
}

#[test]
fn werner_holevo_game_values() {
    let out = cbnorm(&["game-analyze", "--game", "wh:2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &report(&out)["result"];
    assert!(close(&r["entangled_value"], 1.0, 1e-6));
    assert!(close(&r["unentangled_value"], 0.75, 1e-6));
    assert_eq!(r["gap_certificate"]["verdict"], true);
}

#[test]
fn choi_file_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first = report(&cbnorm(&["choi", "--map", "wh1:3"]));
    let text = serde_json::to_string(&first["result"]["map"]).unwrap();
    let path = dir.path().join("map.json");
    std::fs::write(&path, &text).unwrap();
    let second = report(&cbnorm(&["choi", "--map", path.to_str().unwrap()]));
    assert_eq!(serde_json::to_string(&second["result"]["map"]).unwrap(), text);
    assert_eq!(second["result"]["completely_positive"]["holds"], true);
}

#[test]
fn reports_are_deterministic_and_seed_is_overridable() {
    let args = ["norms", "--map", "wh0:2", "--restarts", "5"];
    let a = cbnorm(&args);
    let b = cbnorm(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let with_env = |extra: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_cbnorm"))
            .args(args)
            .args(extra)
            .env("CBNORM_SEED", "7")
            .output()
            .unwrap();
        report(&out)["config"]["seed"].as_u64().unwrap()
    };
    assert_eq!(with_env(&[]), 7);
    assert_eq!(with_env(&["--seed", "9"]), 9);
}

#[test]
fn malformed_json_is_an_error_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"kind\": \"choi\",\n \"in_dim\": 2,,}").unwrap();
    let out = cbnorm(&["choi", "--map", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["status"], "error");
    assert!(r["result"]["error"].as_str().unwrap().contains("line 2"));
}

#[test]
fn dimension_mismatch_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("map.json");
    let json = r#"{"kind": "choi", "in_dim": 2, "out_dim": 2, "choi": {"rows": 1, "cols": 1, "data": [[1.0, 0.0]]}}"#;
    std::fs::write(&path, json).unwrap();
    assert_eq!(cbnorm(&["choi", "--map", path.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(cbnorm(&["choi", "--map", "nonsense:2"]).status.code(), Some(1));
    assert_eq!(cbnorm(&["choi", "--map", "identity:2", "--restarts", "0"]).status.code(), Some(1));
}

#[test]
fn refused_extraction_reports_the_failed_check() {
    let out = cbnorm(&["extract-structure", "--map", "transpose:2"]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert!(r["result"]["refused"].is_string());
    assert_eq!(r["result"]["report"]["verdict"], false);
}

#[test]
fn constructed_game_decomposes() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("construct.json");
    let out = cbnorm(&["game-construct", "--r", "0.3", "-n", "2", "--output", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let built: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let game_path = dir.path().join("game.json");
    std::fs::write(&game_path, serde_json::to_string(&built["result"]["game"]).unwrap()).unwrap();
    let out = cbnorm(&["game-decompose", "--game", game_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(close(&report(&out)["result"]["r_weight"], 0.3, 1e-7));
}

#[test]
fn text_format_summarizes() {
    let out = cbnorm(&["certify-isometry", "--map", "identity:2", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("status: pass"));
    assert!(text.contains("[PASS]"));
}

#[test]
fn selftest_passes() {
    let out = cbnorm(&["selftest"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(&out);
    assert_eq!(r["result"]["criteria"].as_array().unwrap().len(), 11);
}

#[test]
fn named_game_matches_json_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wh3.json");
    let g = cbnorm::game::wh_game(3).unwrap();
    assert!((g.lambda - 2.0 / 3.0).abs() < 1e-15);
    std::fs::write(&path, serde_json::to_string(&g.to_json()).unwrap()).unwrap();
    let a = report(&cbnorm(&["game-analyze", "--game", "wh:3", "--restarts", "5"]));
    let b = report(&cbnorm(&["game-analyze", "--game", path.to_str().unwrap(), "--restarts", "5"]));
    assert_eq!(a["result"], b["result"]);
}
