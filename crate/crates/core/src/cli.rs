//! `handover` command-line interface.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::engine::{EngineError, MatcherConfig, Strategy};
use crate::io::{self, IoError, RunReport, SummaryRow, Topology};
use crate::metrics::{self, EvalReport, ThroughputReport};
use crate::pipeline::{self, PipelineError, RunOptions, RunOutput};
use crate::sim::{self, GroundTruth, Regime, ScenarioConfig, SimError, SimOutput};
use crate::sync::SyncError;
use crate::track::TrackState;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_PARSE: u8 = 4;
pub const EXIT_CONFIG: u8 = 5;
pub const EXIT_CAUSALITY: u8 = 6;

const EXIT_HELP: &str = "\
Exit codes:
  0  success
  2  usage error (bad or missing arguments)
  3  I/O error (missing or unwritable file)
  4  malformed input (syntax, header, field or record order)
  5  invalid configuration or violated invariant
  6  stream causality violation (frame or time going backwards)";

#[derive(Debug, Parser)]
#[command(name = "handover", version, about = "Multi-camera vehicle handover: simulate, stitch, evaluate, benchmark")]
#[command(after_help = EXIT_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a scenario: per-camera tracklets, truth files and topology.
    Simulate(SimulateArgs),
    /// Stitch per-camera tracklet files into global trajectories.
    Stitch(StitchArgs),
    /// Score stitched trajectories against truth files.
    Evaluate(EvaluateArgs),
    /// Simulate, stitch and evaluate in one process.
    Run(RunArgs),
    /// Measure stitching throughput on a dense scenario.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct MatcherArgs {
    /// Matching strategy.
    #[arg(long, value_parser = parse_strategy)]
    pub strategy: Option<Strategy>,
    /// Temporal search window, seconds.
    #[arg(long)]
    pub dt_window: Option<f64>,
    /// Lateral gate on |Δy_rel|.
    #[arg(long)]
    pub eps_lat: Option<f64>,
    /// Buffer entry time-to-live, seconds.
    #[arg(long)]
    pub ttl: Option<f64>,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse()
}

impl MatcherArgs {
    fn apply(&self, mut m: MatcherConfig) -> MatcherConfig {
        if let Some(s) = self.strategy {
            m.strategy = s;
        }
        if let Some(v) = self.dt_window {
            m.dt_window = v;
        }
        if let Some(v) = self.eps_lat {
            m.eps_lat = v;
        }
        if let Some(v) = self.ttl {
            m.eps_time = v;
        }
        m
    }
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Random seed; required for reproducibility.
    #[arg(long)]
    pub seed: u64,
    /// Traffic regime (defaults to the scenario file's, else free-flow).
    #[arg(long, value_parser = parse_regime)]
    pub regime: Option<Regime>,
    /// Scenario TOML layered over the regime defaults.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Footprint drift amplitude in meters, applied to every camera.
    #[arg(long)]
    pub drift: Option<f64>,
}

fn parse_regime(s: &str) -> Result<Regime, String> {
    s.parse()
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub matcher: MatcherArgs,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct StitchArgs {
    #[arg(long)]
    pub topology: PathBuf,
    /// Directory holding tracklets_cam<ID>.csv files.
    #[arg(long)]
    pub input: PathBuf,
    /// Number of frames to process; read from <input>/scenario.toml when
    /// present, else inferred from the last record.
    #[arg(long)]
    pub frames: Option<u64>,
    #[command(flatten)]
    pub matcher: MatcherArgs,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Directory with trajectories.csv and events.csv from `stitch`.
    #[arg(long)]
    pub pred: PathBuf,
    /// Directory with the truth files from `simulate`.
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub matcher: MatcherArgs,
    /// Release lagging cameras after this many frames instead of waiting.
    #[arg(long)]
    pub max_lag: Option<u64>,
    /// Feed the barrier from one producer thread per camera.
    #[arg(long)]
    pub threaded: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Approximate number of vehicles over the run.
    #[arg(long, default_value_t = 200)]
    pub vehicles: u32,
    /// Scenario duration, seconds.
    #[arg(long, default_value_t = 60.0)]
    pub duration: f64,
    #[command(flatten)]
    pub matcher: MatcherArgs,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        let code = match e {
            IoError::Io { .. } => EXIT_IO,
            IoError::Parse { .. } => EXIT_PARSE,
            IoError::Invalid { .. } => EXIT_CONFIG,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::new(EXIT_CONFIG, e.to_string())
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        let code = match &e {
            PipelineError::Sync(SyncError::Causality { .. }) | PipelineError::Engine(EngineError::OutOfOrder { .. }) => {
                EXIT_CAUSALITY
            }
            PipelineError::Sync(SyncError::UnregisteredCamera(_)) | PipelineError::Engine(EngineError::Malformed(_)) => {
                EXIT_PARSE
            }
            PipelineError::Sync(SyncError::Config(_)) | PipelineError::Engine(EngineError::Config(_)) => EXIT_CONFIG,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        PipelineError::from(e).into()
    }
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

pub fn execute(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Simulate(a) => simulate_cmd(a),
        Command::Stitch(a) => stitch_cmd(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Run(a) => run_cmd(a),
        Command::Bench(a) => bench_cmd(a),
    }
}

fn resolve_scenario(a: &ScenarioArgs) -> Result<ScenarioConfig, CliError> {
    let mut cfg = match &a.scenario {
        Some(p) => io::read_scenario_as(p, a.regime)?,
        None => ScenarioConfig::for_regime(a.regime.unwrap_or(Regime::FreeFlow), a.seed),
    };
    cfg.seed = a.seed;
    if let Some(d) = a.drift {
        cfg.noise.drift_amplitude = d;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn matcher_from(args: &MatcherArgs, base: MatcherConfig) -> Result<MatcherConfig, CliError> {
    let m = args.apply(base);
    m.validate()?;
    Ok(m)
}

fn write_observations(dir: &Path, out: &SimOutput, matcher: &MatcherConfig) -> Result<(), CliError> {
    let topology = Topology { graph: out.graph.clone(), matcher: *matcher, kinematics: Default::default() };
    io::write_scenario(&dir.join("scenario.toml"), &out.config)?;
    write_file(&dir.join("topology.toml"), &io::write_topology(&topology))?;
    for cam in out.graph.camera_ids() {
        let path = dir.join(format!("tracklets_cam{cam}.csv"));
        let states = out.camera_updates(cam).into_iter().flat_map(|u| u.tracks.iter());
        io::write_tracklets(&path, states.map(|s| (s, None)))?;
    }
    io::write_truth_dir(dir, &out.truth)?;
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(d) = path.parent() {
        std::fs::create_dir_all(d).map_err(|e| IoError::Io { path: d.to_path_buf(), source: e })?;
    }
    std::fs::write(path, text).map_err(|e| IoError::Io { path: path.to_path_buf(), source: e })?;
    Ok(())
}

fn simulate_cmd(a: &SimulateArgs) -> Result<(), CliError> {
    let cfg = resolve_scenario(&a.scenario)?;
    let matcher = matcher_from(&a.matcher, MatcherConfig::default())?;
    let out = sim::simulate(&cfg)?;
    write_observations(&a.out_dir, &out, &matcher)?;
    println!(
        "simulated {} vehicles, {} observations, {} true handovers -> {}",
        out.truth.vehicles.len(),
        out.truth.observations.len(),
        out.truth.handovers.len(),
        a.out_dir.display()
    );
    Ok(())
}

fn write_stitched(dir: &Path, topology: &Topology, run: &RunOutput) -> Result<(), CliError> {
    write_file(&dir.join("topology.toml"), &io::write_topology(topology))?;
    io::write_tracklets(&dir.join("trajectories.csv"), run.states.iter().map(|s| (s, None)))?;
    io::write_events(&dir.join("events.csv"), &run.events)?;
    Ok(())
}

fn stitch_cmd(a: &StitchArgs) -> Result<(), CliError> {
    let mut topology = io::read_topology(&a.topology)?;
    topology.matcher = matcher_from(&a.matcher, topology.matcher)?;
    let cams = topology.graph.camera_ids();
    let mut states: Vec<TrackState> = Vec::new();
    for &cam in &cams {
        let path = a.input.join(format!("tracklets_cam{cam}.csv"));
        for r in io::read_tracklets(&path)? {
            if r.state.camera_id != cam {
                return Err(CliError::new(
                    EXIT_PARSE,
                    format!("{}: record for camera {}", path.display(), r.state.camera_id),
                ));
            }
            states.push(r.state);
        }
    }
    let scenario_path = a.input.join("scenario.toml");
    let frames = match a.frames {
        Some(f) => Some(f),
        None if scenario_path.exists() => Some(io::read_scenario(&scenario_path)?.frame_count()),
        None => None,
    };
    let frame_dt = topology.graph.nodes()[0].calibration.frame_dt();
    let updates = io::updates_from_states(&states, &cams, frame_dt, frames);
    let opts = RunOptions { matcher: topology.matcher, kinematics: topology.kinematics, max_lag: None };
    let run = pipeline::run_updates(topology.graph.clone(), updates, &opts)?;
    write_stitched(&a.out_dir, &topology, &run)?;
    println!("stitched {} observations, {} events -> {}", run.states.len(), run.events.len(), a.out_dir.display());
    Ok(())
}

fn write_report(dir: &Path, report: &RunReport, latency_ms: Option<f64>) -> Result<(), CliError> {
    io::write_json(&dir.join("report.json"), report)?;
    let table = io::summary_table(&[SummaryRow::from_report(report, latency_ms)]);
    write_file(&dir.join("summary.txt"), &table)?;
    print!("{table}");
    Ok(())
}

fn evaluate_cmd(a: &EvaluateArgs) -> Result<(), CliError> {
    let truth = io::read_truth_dir(&a.truth)?;
    let states: Vec<TrackState> = io::read_tracklets(&a.pred.join("trajectories.csv"))?.into_iter().map(|r| r.state).collect();
    let events = io::read_events(&a.pred.join("events.csv"))?;
    check_predictions(&truth, &states)?;
    let topo_path = a.pred.join("topology.toml");
    let matcher = if topo_path.exists() { io::read_topology(&topo_path)?.matcher } else { MatcherConfig::default() };
    let scen_path = a.truth.join("scenario.toml");
    let scenario = if scen_path.exists() { Some(io::read_scenario(&scen_path)?) } else { None };
    let eval = metrics::evaluate(&truth, &states, &events);
    let report = RunReport::new(
        scenario.as_ref().map(|s| s.regime.as_str().to_string()),
        scenario.as_ref().map(|s| s.seed),
        &matcher,
        eval,
    );
    write_report(&a.out_dir, &report, None)
}

/// Every predicted observation must exist in the truth correspondence.
fn check_predictions(truth: &GroundTruth, states: &[TrackState]) -> Result<(), CliError> {
    let labels = truth.labels();
    if let Some(s) = states.iter().find(|s| !labels.contains_key(&s.key())) {
        return Err(CliError::new(
            EXIT_CONFIG,
            format!("prediction (camera {}, local {}) has no truth correspondence", s.camera_id, s.local_id),
        ));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct Timing {
    throughput: ThroughputReport,
    late_dropped: u64,
    stalled_snapshots: u64,
}

/// Runs the engine over a simulated output.
pub fn stitch_simulated(out: &SimOutput, opts: &RunOptions, threaded: bool) -> Result<RunOutput, PipelineError> {
    if threaded {
        let per_camera = out
            .graph
            .camera_ids()
            .into_iter()
            .map(|c| out.camera_updates(c).into_iter().cloned().collect())
            .collect();
        pipeline::run_threaded(out.graph.clone(), per_camera, opts)
    } else {
        pipeline::run_updates(out.graph.clone(), out.updates.iter().cloned(), opts)
    }
}

fn median_ms(tp: &ThroughputReport) -> Option<f64> {
    tp.latency.map(|l| l.p50_us / 1000.0)
}

fn run_cmd(a: &RunArgs) -> Result<(), CliError> {
    let cfg = resolve_scenario(&a.scenario)?;
    let matcher = matcher_from(&a.matcher, MatcherConfig::default())?;
    let out = sim::simulate(&cfg)?;
    write_observations(&a.out_dir, &out, &matcher)?;
    let opts = RunOptions { matcher, kinematics: Default::default(), max_lag: a.max_lag };
    let run = stitch_simulated(&out, &opts, a.threaded)?;
    let topology = Topology { graph: out.graph.clone(), matcher, kinematics: opts.kinematics };
    write_stitched(&a.out_dir, &topology, &run)?;
    let eval = metrics::evaluate(&out.truth, &run.states, &run.events);
    let report = RunReport::new(Some(cfg.regime.as_str().into()), Some(cfg.seed), &matcher, eval);
    let tp = metrics::throughput_report(&run.latencies, run.wall, run.stats, run.max_barrier_pending);
    io::write_json(
        &a.out_dir.join("timing.json"),
        &Timing { throughput: tp, late_dropped: run.late_dropped, stalled_snapshots: run.stalled_snapshots },
    )?;
    write_report(&a.out_dir, &report, median_ms(&tp))
}

/// Dense free-flow scenario used by `bench`.
pub fn bench_scenario(seed: u64, vehicles: u32, duration: f64) -> ScenarioConfig {
    ScenarioConfig {
        duration,
        // Four lanes keep the per-lane rate under car-following capacity.
        lanes_per_direction: 4,
        vehicle_arrival: vehicles as f64 / 2.0 / (duration / 60.0),
        ..ScenarioConfig::for_regime(Regime::FreeFlow, seed)
    }
}

#[derive(Debug, Serialize)]
pub struct BenchReport {
    pub seed: u64,
    pub cameras: usize,
    pub vehicles: usize,
    pub duration_s: f64,
    pub frame_rate: f64,
    pub throughput: ThroughputReport,
    /// Stitching ran at or above the camera frame rate.
    pub faster_than_real_time: bool,
    pub simulate_wall_s: f64,
    pub eval: EvalReport,
}

pub fn run_bench(seed: u64, vehicles: u32, duration: f64, matcher: MatcherConfig) -> Result<BenchReport, CliError> {
    let cfg = bench_scenario(seed, vehicles, duration);
    cfg.validate()?;
    let t0 = Instant::now();
    let out = sim::simulate(&cfg)?;
    let simulate_wall_s = t0.elapsed().as_secs_f64();
    let opts = RunOptions { matcher, ..Default::default() };
    let run = stitch_simulated(&out, &opts, false)?;
    let throughput = metrics::throughput_report(&run.latencies, run.wall, run.stats, run.max_barrier_pending);
    Ok(BenchReport {
        seed,
        cameras: cfg.camera_count,
        vehicles: out.truth.vehicles.len(),
        duration_s: duration,
        frame_rate: cfg.frame_rate,
        faster_than_real_time: throughput.snapshots_per_s >= cfg.frame_rate,
        throughput,
        simulate_wall_s,
        eval: metrics::evaluate(&out.truth, &run.states, &run.events),
    })
}

fn bench_cmd(a: &BenchArgs) -> Result<(), CliError> {
    let matcher = matcher_from(&a.matcher, MatcherConfig::default())?;
    let r = run_bench(a.seed, a.vehicles, a.duration, matcher)?;
    io::write_json(&a.out_dir.join("bench.json"), &r)?;
    let lat = r.throughput.latency;
    println!(
        "{} cameras, {} vehicles, {:.0} s: {} snapshots in {:.3} s = {:.0} snapshots/s ({}), p50 {:.1} us, p99 {:.1} us",
        r.cameras,
        r.vehicles,
        r.duration_s,
        r.throughput.snapshots,
        r.throughput.wall_s,
        r.throughput.snapshots_per_s,
        if r.faster_than_real_time { "faster than real time" } else { "SLOWER than real time" },
        lat.map_or(0.0, |l| l.p50_us),
        lat.map_or(0.0, |l| l.p99_us),
    );
    Ok(())
}

/// Regime name to report row, for multi-run summaries.
pub fn summary_rows(reports: &BTreeMap<String, (RunReport, Option<f64>)>) -> Vec<SummaryRow> {
    reports.values().map(|(r, l)| SummaryRow::from_report(r, *l)).collect()
}
