use std::path::Path;
use std::process::{Command, Output};

use bimgraph_core::graph::{Layer, SceneGraph};

fn bimgraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bimgraph")).args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn empty_map_fails_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("empty.xyz");
    std::fs::write(&map, "").unwrap();
    let out = bimgraph(&["offline", "--map", s(&map), "--out", s(&dir.path().join("o"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
}

#[test]
fn missing_file_and_bad_override_fail() {
    let dir = tempfile::tempdir().unwrap();
    let out = bimgraph(&["offline", "--map", "/nonexistent/map.ply", "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    let world = dir.path().join("w");
    assert!(bimgraph(&["synth", "--scene", "single-room", "--out", s(&world)]).status.success());
    let out = bimgraph(&[
        "offline",
        "--map",
        s(&world.join("map.ply")),
        "--out",
        s(&dir.path().join("o")),
        "--set",
        "bev.no_such_key=1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_key"));
}

#[test]
fn map_only_gives_structure_layers_and_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let world = dir.path().join("world");
    assert!(bimgraph(&["synth", "--scene", "five-room", "--out", s(&world)]).status.success());
    let out_dir = dir.path().join("out");
    let out = bimgraph(&[
        "offline",
        "--map",
        s(&world.join("map.ply")),
        "--ground-truth",
        s(&world.join("gt_rooms.pgm")),
        "--out",
        s(&out_dir),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in [
        "bev.pgm",
        "bev.json",
        "bev_denoised.pgm",
        "bev_denoised.json",
        "rooms.pgm",
        "colored.ply",
        "graph.json",
        "timing.json",
        "metrics.json",
    ] {
        assert!(out_dir.join(f).is_file(), "{f} missing");
    }
    let g = SceneGraph::from_json(&std::fs::read_to_string(out_dir.join("graph.json")).unwrap()).unwrap();
    g.validate().unwrap();
    assert_eq!(g.count(Layer::Room), 5);
    assert_eq!(g.count(Layer::Building), 1);
    assert_eq!(g.count(Layer::Scene), 0);
    assert_eq!(g.count(Layer::Object), 0);

    // The rooms raster evaluates against the ground truth like metrics.json.
    let metrics = dir.path().join("m.json");
    let out = bimgraph(&[
        "eval",
        "--pred",
        s(&out_dir.join("rooms.pgm")),
        "--gt",
        s(&world.join("gt_rooms.pgm")),
        "--out",
        s(&metrics),
    ]);
    assert!(out.status.success());
    assert_eq!(std::fs::read(&metrics).unwrap(), std::fs::read(out_dir.join("metrics.json")).unwrap());
}

#[test]
fn session_replays_online_with_revisions() {
    let dir = tempfile::tempdir().unwrap();
    let session = dir.path().join("session");
    assert!(bimgraph(&["synth", "--scene", "single-room", "--session", "--out", s(&session)]).status.success());
    let out_dir = dir.path().join("out");
    let out = bimgraph(&[
        "online",
        "--session",
        s(&session),
        "--out",
        s(&out_dir),
        "--max-ticks",
        "2",
        "--tick-period",
        "1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("2 ticks (interrupted)"));
    assert_eq!(std::fs::read_to_string(out_dir.join("timing.jsonl")).unwrap().lines().count(), 2);
    let latest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("latest.json")).unwrap()).unwrap();
    let path = out_dir.join(latest["path"].as_str().unwrap());
    SceneGraph::from_json(&std::fs::read_to_string(path).unwrap()).unwrap().validate().unwrap();
}

#[test]
fn corrupt_then_bench_small() {
    let dir = tempfile::tempdir().unwrap();
    let world = dir.path().join("w");
    assert!(bimgraph(&["synth", "--scene", "single-room", "--out", s(&world)]).status.success());
    let out_dir = dir.path().join("o");
    assert!(bimgraph(&["offline", "--map", s(&world.join("map.ply")), "--out", s(&out_dir)]).status.success());
    let noisy = dir.path().join("noisy.pgm");
    let out = bimgraph(&[
        "corrupt",
        "--input",
        s(&out_dir.join("bev.pgm")),
        "--out",
        s(&noisy),
        "--salt",
        "2",
        "--pepper",
        "2",
        "--gaps",
        "3",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(noisy.is_file());

    let out = bimgraph(&["bench", "--sizes", "20000,40000"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 2);
    assert_eq!(bimgraph(&["bench", "--sizes", "0"]).status.code(), Some(1));
}
