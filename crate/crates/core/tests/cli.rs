mod common;

use std::path::Path;

use common::{handover, path_str};
use handover_core::cli::{EXIT_CAUSALITY, EXIT_CONFIG, EXIT_IO, EXIT_PARSE, EXIT_USAGE};
use handover_core::engine::MatcherConfig;
use handover_core::io::{self, TRACKLET_HEADER};
use handover_core::sim::{Regime, ScenarioConfig};

fn code(args: &[&str]) -> i32 {
    let out = handover(args);
    out.status.code().expect("exit code")
}

fn ok(args: &[&str]) {
    let out = handover(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn topology_fixture() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/topology_3cam.toml").to_str().unwrap().to_string()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&[]), EXIT_USAGE as i32);
    assert_eq!(code(&["run", "--out-dir", "x"]), EXIT_USAGE as i32);
    assert_eq!(code(&["run", "--seed", "1", "--strategy", "lifo", "--out-dir", "x"]), EXIT_USAGE as i32);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn missing_input_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let missing = dir.path().join("nothing");
    assert_eq!(
        code(&["stitch", "--topology", &topology_fixture(), "--input", path_str(&missing), "--out-dir", path_str(&out)]),
        EXIT_IO as i32
    );
}

#[test]
fn malformed_tracklets_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{}\n0,0.0,1,1,0,0,abc,0,NA,NA,NA,NA\n", TRACKLET_HEADER.join(","));
    std::fs::write(dir.path().join("tracklets_cam1.csv"), text).unwrap();
    let out = dir.path().join("o");
    let args = ["stitch", "--topology", &topology_fixture(), "--input", path_str(dir.path()), "--out-dir", path_str(&out)];
    assert_eq!(code(&args), EXIT_PARSE as i32);
}

#[test]
fn invalid_config_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    assert_eq!(code(&["run", "--seed", "1", "--ttl", "1.0", "--out-dir", path_str(&out)]), EXIT_CONFIG as i32);
    let scen = dir.path().join("s.toml");
    std::fs::write(&scen, "seed = 1\noverlap_length = 500.0\n").unwrap();
    assert_eq!(code(&["simulate", "--seed", "1", "--scenario", path_str(&scen), "--out-dir", path_str(&out)]), EXIT_CONFIG as i32);
}

#[test]
fn time_reversal_exits_6() {
    let dir = tempfile::tempdir().unwrap();
    let h = TRACKLET_HEADER.join(",");
    let cam1 = format!("{h}\n0,1.0,1,1,50,0,50,-2,NA,NA,NA,NA\n1,0.5,1,1,51,0,51,-2,NA,NA,NA,NA\n");
    std::fs::write(dir.path().join("tracklets_cam1.csv"), cam1).unwrap();
    for c in [2, 3] {
        std::fs::write(dir.path().join(format!("tracklets_cam{c}.csv")), format!("{h}\n")).unwrap();
    }
    let out = dir.path().join("o");
    let args = ["stitch", "--topology", &topology_fixture(), "--input", path_str(dir.path()), "--out-dir", path_str(&out)];
    assert_eq!(code(&args), EXIT_CAUSALITY as i32);
}

#[test]
fn simulate_stitch_evaluate_flow() {
    let dir = tempfile::tempdir().unwrap();
    let obs = dir.path().join("obs");
    let pred = dir.path().join("pred");
    let eval = dir.path().join("eval");
    ok(&["simulate", "--seed", "3", "--regime", "free-flow", "--out-dir", path_str(&obs)]);
    let topo = obs.join("topology.toml");
    ok(&["stitch", "--topology", path_str(&topo), "--input", path_str(&obs), "--out-dir", path_str(&pred)]);
    ok(&["evaluate", "--pred", path_str(&pred), "--truth", path_str(&obs), "--out-dir", path_str(&eval)]);
    let r = report(&eval);
    assert_eq!(r["regime"], "free-flow");
    assert!(r["eval"]["handovers_total"].as_u64().unwrap() > 0);
    assert_eq!(r["eval"]["hosr"].as_f64(), Some(1.0), "{r}");
}

#[test]
fn file_stitch_matches_in_process_run() {
    let dir = tempfile::tempdir().unwrap();
    let obs = dir.path().join("obs");
    let pred = dir.path().join("pred");
    ok(&["simulate", "--seed", "5", "--regime", "overtaking", "--out-dir", path_str(&obs)]);
    ok(&["stitch", "--topology", path_str(&obs.join("topology.toml")), "--input", path_str(&obs), "--out-dir", path_str(&pred)]);

    let cfg = ScenarioConfig::for_regime(Regime::Overtaking, 5);
    let out = common::simulate(&cfg);
    let (run, _) = common::stitch(&out, MatcherConfig::default());
    let file_events = std::fs::read_to_string(pred.join("events.csv")).unwrap();
    assert_eq!(file_events, io::events_to_string(&run.events));
}

#[test]
fn strict_fifo_loses_handovers_when_overtaking() {
    let dir = tempfile::tempdir().unwrap();
    let la = dir.path().join("la");
    let fifo = dir.path().join("fifo");
    ok(&["run", "--seed", "2", "--regime", "overtaking", "--out-dir", path_str(&la)]);
    ok(&["run", "--seed", "2", "--regime", "overtaking", "--strategy", "strict-fifo", "--out-dir", path_str(&fifo)]);
    let (a, b) = (report(&la), report(&fifo));
    assert_eq!(b["strategy"], "strict-fifo");
    let (ha, hb) = (a["eval"]["hosr"].as_f64().unwrap(), b["eval"]["hosr"].as_f64().unwrap());
    assert!(hb < ha, "fifo {hb} vs lateral-aware {ha}");
}

#[test]
fn threaded_run_writes_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let seq = dir.path().join("seq");
    let thr = dir.path().join("thr");
    ok(&["run", "--seed", "8", "--regime", "merge-diverge", "--out-dir", path_str(&seq)]);
    ok(&["run", "--seed", "8", "--regime", "merge-diverge", "--threaded", "--out-dir", path_str(&thr)]);
    for f in ["events.csv", "trajectories.csv", "report.json"] {
        assert_eq!(std::fs::read(seq.join(f)).unwrap(), std::fs::read(thr.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn regime_flag_overrides_scenario_file() {
    let dir = tempfile::tempdir().unwrap();
    let scen = dir.path().join("s.toml");
    std::fs::write(&scen, "regime = \"free-flow\"\nseed = 4\nduration = 20.0\n").unwrap();
    let out = dir.path().join("o");
    ok(&["simulate", "--seed", "4", "--scenario", path_str(&scen), "--regime", "congestion", "--out-dir", path_str(&out)]);
    let back = io::read_scenario(&out.join("scenario.toml")).unwrap();
    assert_eq!(back.regime, Regime::Congestion);
    assert_eq!(back.duration, 20.0);
    assert_eq!(back.stop_waves, ScenarioConfig::for_regime(Regime::Congestion, 4).stop_waves);
}
