//! Seeded synthetic corridor: traffic, camera observations and ground truth.
//!
//! Cameras are numbered from 1 along +x. Each random purpose draws from its
//! own ChaCha stream derived from the scenario seed, so changing one noise
//! source leaves the others untouched.

mod config;
mod observe;
mod traffic;
mod truth;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use config::{Direction, NoiseConfig, Regime, ScenarioConfig, ScriptedVehicle, StopWave};
pub use observe::{quantize, LOST_FRAMES};
pub use traffic::{Role, VehicleInfo, VehicleState, SIDE_ROAD_LEN};
pub use truth::{zone_of, GroundTruth, LabeledState, ParallelPair, TrueHandover, TruthSample, VehicleId};

use crate::engine::{CameraNode, Edge, EdgeId, TopologyGraph};
use crate::geometry::{Point2, Polygon, RoadFrame};
use crate::kinematics::Calibration;
use crate::sync::StreamUpdate;
use crate::track::CameraId;
use observe::CameraModel;
use traffic::Traffic;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Config(String),
}

const STREAM_TRAFFIC: u64 = 1;
const STREAM_DRIFT: u64 = 2;
const STREAM_NOISE: u64 = 100;
const STREAM_SYNC: u64 = 10_000;

/// Half-length of the blind-gap trigger strip reaching into each footprint.
const BLIND_TRIGGER: f64 = 25.0;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Half-width of every footprint across the road.
pub fn footprint_lateral(cfg: &ScenarioConfig) -> f64 {
    cfg.road_width() / 2.0 + cfg.side_margin
}

/// Camera graph for a scenario: a chain along +x sharing one road frame.
pub fn build_topology(cfg: &ScenarioConfig) -> Result<TopologyGraph, SimError> {
    cfg.validate()?;
    let err = |e: &dyn std::fmt::Display| SimError::Config(e.to_string());
    let w = cfg.road_width();
    let lat = footprint_lateral(cfg);
    let frame = RoadFrame::new(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), w, 0.0).map_err(|e| err(&e))?;
    let cal = Calibration::new(cfg.lambda, cfg.frame_dt()).map_err(|e| err(&e))?;
    let mut nodes = Vec::new();
    for i in 0..cfg.camera_count {
        let (x0, x1) = cfg.footprint_x(i);
        let fov = Polygon::rect(Point2::new(x0, -lat), Point2::new(x1, lat)).map_err(|e| err(&e))?;
        nodes.push(CameraNode { id: i as CameraId + 1, fov, calibration: cal, frame });
    }
    let mut edges = Vec::new();
    for i in 0..cfg.camera_count.saturating_sub(1) {
        let up_end = cfg.footprint_x(i).1;
        let down_start = cfg.footprint_x(i + 1).0;
        let (a, b) = if cfg.blind_gap {
            let reach = BLIND_TRIGGER.min(cfg.footprint_length() / 4.0);
            (up_end - reach, down_start + reach)
        } else {
            (down_start, up_end)
        };
        let overlap = Polygon::rect(Point2::new(a, -w / 2.0 - 1.0), Point2::new(b, w / 2.0 + 1.0)).map_err(|e| err(&e))?;
        let id = EdgeId::new(i as CameraId + 1, i as CameraId + 2);
        edges.push(Edge { id, overlap, frame });
    }
    TopologyGraph::new(nodes, edges).map_err(|e| err(&e))
}

/// Simulation state advanced one frame at a time.
#[derive(Debug, Clone)]
pub struct World {
    cfg: ScenarioConfig,
    graph: TopologyGraph,
    traffic: Traffic,
    cameras: Vec<CameraModel>,
    frame: u64,
    frames: u64,
    samples: Vec<TruthSample>,
    observations: Vec<LabeledState>,
}

pub fn build_world(cfg: &ScenarioConfig) -> Result<World, SimError> {
    let graph = build_topology(cfg)?;
    let mut traffic_rng = stream(cfg.seed, STREAM_TRAFFIC);
    let mut traffic = Traffic::new(cfg, &mut traffic_rng);
    traffic.spawn_due(0.0);
    let mut drift_rng = stream(cfg.seed, STREAM_DRIFT);
    let lat = footprint_lateral(cfg);
    let cameras = (0..cfg.camera_count)
        .map(|i| {
            let id = i as CameraId + 1;
            let phase = drift_rng.random_range(0.0..std::f64::consts::TAU);
            let drifting = cfg.noise.drift_cameras.is_empty() || cfg.noise.drift_cameras.contains(&id);
            let rng = stream(cfg.seed, STREAM_NOISE + id as u64);
            CameraModel::new(id, cfg.footprint_x(i), lat, cfg.lambda, &cfg.noise, drifting, phase, rng)
        })
        .collect();
    Ok(World {
        cfg: cfg.clone(),
        graph,
        traffic,
        cameras,
        frame: 0,
        frames: cfg.frame_count(),
        samples: Vec::new(),
        observations: Vec::new(),
    })
}

impl World {
    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn graph(&self) -> &TopologyGraph {
        &self.graph
    }

    pub fn frame_index(&self) -> u64 {
        self.frame
    }

    pub fn time(&self) -> f64 {
        quantize(self.frame as f64 * self.cfg.frame_dt())
    }

    pub fn is_finished(&self) -> bool {
        self.frame >= self.frames
    }

    pub fn vehicles(&self) -> Vec<VehicleState> {
        self.traffic.states()
    }

    /// Footprint drift of a camera at the current time.
    pub fn drift(&self, camera: CameraId) -> Option<f64> {
        let t = self.time();
        self.cameras.iter().find(|c| c.id == camera).map(|c| c.drift(t))
    }

    /// Detections of one camera for the current frame. Call at most once per
    /// camera per frame; each call consumes that camera's noise stream.
    pub fn observe(&mut self, camera: CameraId) -> Option<StreamUpdate> {
        let t = self.time();
        let frame = self.frame;
        let vehicles = self.traffic.states();
        let cam = self.cameras.iter_mut().find(|c| c.id == camera)?;
        let detections = cam.observe(frame, t, &vehicles);
        let mut tracks = Vec::with_capacity(detections.len());
        for (state, vehicle) in detections {
            self.observations.push(LabeledState { state: state.clone(), vehicle });
            tracks.push(state);
        }
        Some(StreamUpdate { camera_id: camera, frame_index: frame, t, tracks, arrival_seq: 0 })
    }

    /// Records the current true states, then advances the world one frame.
    pub fn step_truth(&mut self) -> Vec<TruthSample> {
        let t = self.time();
        let frame = self.frame;
        let now: Vec<TruthSample> = self
            .traffic
            .states()
            .into_iter()
            .map(|v| TruthSample { frame_index: frame, t, vehicle: v.id, pos: v.pos, speed: v.speed, lane: v.lane })
            .collect();
        self.samples.extend(now.iter().cloned());
        let dt = self.cfg.frame_dt();
        self.traffic.advance(frame as f64 * dt, dt);
        self.frame += 1;
        self.traffic.spawn_due(self.frame as f64 * dt);
        now
    }

    /// Observes every camera for the current frame, then advances.
    pub fn step(&mut self) -> Vec<StreamUpdate> {
        let ids: Vec<CameraId> = self.cameras.iter().map(|c| c.id).collect();
        let updates = ids.into_iter().filter_map(|c| self.observe(c)).collect();
        self.step_truth();
        updates
    }

    pub fn export_truth(self) -> GroundTruth {
        GroundTruth::derive(self.traffic.info().clone(), self.samples, self.observations, &self.graph)
    }
}

/// A complete simulated run.
#[derive(Debug, Clone)]
pub struct SimOutput {
    pub config: ScenarioConfig,
    pub graph: TopologyGraph,
    /// Per-camera updates in arrival order; `arrival_seq` is the position.
    pub updates: Vec<StreamUpdate>,
    pub truth: GroundTruth,
}

impl SimOutput {
    /// Updates of one camera in frame order.
    pub fn camera_updates(&self, camera: CameraId) -> Vec<&StreamUpdate> {
        let mut v: Vec<&StreamUpdate> = self.updates.iter().filter(|u| u.camera_id == camera).collect();
        v.sort_by_key(|u| u.frame_index);
        v
    }
}

pub fn simulate(cfg: &ScenarioConfig) -> Result<SimOutput, SimError> {
    let mut world = build_world(cfg)?;
    let mut sync: Vec<(ChaCha8Rng, u64)> =
        (1..=cfg.camera_count as u64).map(|c| (stream(cfg.seed, STREAM_SYNC + c), 0)).collect();
    let mut keyed = Vec::new();
    while !world.is_finished() {
        for u in world.step() {
            let (rng, last) = &mut sync[u.camera_id as usize - 1];
            let delay = rng.random_range(0..=cfg.noise.sync_jitter);
            // Per-camera delivery stays in frame order.
            let arrival = (u.frame_index + delay).max(*last);
            *last = arrival;
            keyed.push((arrival, u.camera_id, u.frame_index, u));
        }
    }
    keyed.sort_by_key(|k| (k.0, k.1, k.2));
    let updates = keyed
        .into_iter()
        .enumerate()
        .map(|(i, (_, _, _, mut u))| {
            u.arrival_seq = i as u64;
            u
        })
        .collect();
    let graph = world.graph().clone();
    let truth = world.export_truth();
    Ok(SimOutput { config: cfg.clone(), graph, updates, truth })
}
