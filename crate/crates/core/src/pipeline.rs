//! Update streams -> synchronization barrier -> handover engine.

use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::engine::{Engine, EngineError, EngineStats, HandoverEvent, MatcherConfig, TopologyGraph};
use crate::kinematics::KinematicsConfig;
use crate::sync::{BarrierConfig, Snapshot, StreamUpdate, SyncBarrier, SyncError};
use crate::track::TrackState;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Sync(#[from] SyncError),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub matcher: MatcherConfig,
    pub kinematics: KinematicsConfig,
    /// Straggler release threshold in frames; strict barrier when `None`.
    pub max_lag: Option<u64>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    /// Every processed observation with its kinematics and identity.
    pub states: Vec<TrackState>,
    pub events: Vec<HandoverEvent>,
    /// `(frame_index, t)` of every released snapshot, in release order.
    pub snapshots: Vec<(u64, f64)>,
    pub stats: EngineStats,
    /// Per-snapshot processing time.
    pub latencies: Vec<Duration>,
    pub wall: Duration,
    pub max_barrier_pending: usize,
    pub late_dropped: u64,
    pub stalled_snapshots: u64,
}

/// Incremental driver: feed updates in arrival order, then `finish`.
#[derive(Debug)]
pub struct Pipeline {
    barrier: SyncBarrier,
    engine: Engine,
    out: RunOutput,
    started: Instant,
}

impl Pipeline {
    pub fn new(graph: TopologyGraph, opts: &RunOptions) -> Result<Self, PipelineError> {
        let frame_dt = graph.nodes().first().map(|n| n.calibration.frame_dt()).unwrap_or(1.0);
        let mut cfg = BarrierConfig::strict(graph.camera_ids(), frame_dt);
        cfg.max_lag = opts.max_lag;
        let barrier = SyncBarrier::new(cfg)?;
        let engine = Engine::with_kinematics(graph, opts.matcher, opts.kinematics)?;
        Ok(Self { barrier, engine, out: RunOutput::default(), started: Instant::now() })
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn push(&mut self, update: StreamUpdate) -> Result<(), PipelineError> {
        self.barrier.ingest(update)?;
        while let Some(s) = self.barrier.try_release() {
            self.process(s)?;
        }
        Ok(())
    }

    fn process(&mut self, snapshot: Snapshot) -> Result<(), PipelineError> {
        if !snapshot.stalled.is_empty() {
            self.out.stalled_snapshots += 1;
        }
        self.out.snapshots.push((snapshot.frame_index, snapshot.t));
        let t0 = Instant::now();
        let r = self.engine.process_snapshot(&snapshot)?;
        self.out.latencies.push(t0.elapsed());
        self.out.states.extend(r.states);
        self.out.events.extend(r.events);
        Ok(())
    }

    pub fn finish(mut self) -> Result<RunOutput, PipelineError> {
        for s in self.barrier.flush() {
            self.process(s)?;
        }
        self.out.stats = self.engine.stats();
        self.out.max_barrier_pending = self.barrier.max_pending();
        self.out.late_dropped = self.barrier.late_dropped();
        self.out.wall = self.started.elapsed();
        Ok(self.out)
    }
}

pub fn run_updates<I>(graph: TopologyGraph, updates: I, opts: &RunOptions) -> Result<RunOutput, PipelineError>
where
    I: IntoIterator<Item = StreamUpdate>,
{
    let mut p = Pipeline::new(graph, opts)?;
    for u in updates {
        p.push(u)?;
    }
    p.finish()
}

/// One producer thread per camera feeding a shared channel; the consumer
/// drives the barrier and engine. `per_camera` holds each camera's updates
/// in frame order.
pub fn run_threaded(
    graph: TopologyGraph,
    per_camera: Vec<Vec<StreamUpdate>>,
    opts: &RunOptions,
) -> Result<RunOutput, PipelineError> {
    let mut p = Pipeline::new(graph, opts)?;
    let (tx, rx) = mpsc::sync_channel::<StreamUpdate>(64);
    let handles: Vec<_> = per_camera
        .into_iter()
        .map(|updates| {
            let tx = tx.clone();
            thread::spawn(move || {
                for u in updates {
                    if tx.send(u).is_err() {
                        return;
                    }
                }
            })
        })
        .collect();
    drop(tx);
    let mut result = Ok(());
    for u in rx {
        if result.is_ok() {
            result = p.push(u);
        }
    }
    for h in handles {
        h.join().expect("producer thread panicked");
    }
    result?;
    p.finish()
}
