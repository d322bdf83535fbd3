#![allow(dead_code)]

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output};

use handover_core::engine::MatcherConfig;
use handover_core::metrics::{self, EvalReport};
use handover_core::pipeline::{self, RunOptions, RunOutput};
use handover_core::sim::{self, Regime, ScenarioConfig, SimOutput};

pub fn simulate(cfg: &ScenarioConfig) -> SimOutput {
    sim::simulate(cfg).expect("fixture simulates")
}

pub fn stitch(out: &SimOutput, matcher: MatcherConfig) -> (RunOutput, EvalReport) {
    let opts = RunOptions { matcher, ..Default::default() };
    let run = pipeline::run_updates(out.graph.clone(), out.updates.iter().cloned(), &opts).expect("fixture stitches");
    let eval = metrics::evaluate(&out.truth, &run.states, &run.events);
    (run, eval)
}

pub fn fixture(regime: Regime, seed: u64) -> ScenarioConfig {
    ScenarioConfig::for_regime(regime, seed)
}

/// Writes one verdict line straight to stdout so it shows even when the
/// harness captures output of passing tests.
pub fn verdict(id: u32, name: &str, pass: bool, detail: &str) {
    let line = format!("acceptance {id:>2} [{}] {name}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

pub fn handover(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_handover")).args(args).output().expect("binary runs")
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}
