//! Topology file: cameras, edges, matcher thresholds and optional
//! kinematics tunables.
//!
//! ```toml
//! [matcher]                  # every key optional
//! dt_window = 4.0
//! eps_lat = 0.12
//! eps_time = 30.0
//! gamma_dir = "disabled"     # or a cosine threshold
//! eps_dist = "disabled"      # or meters
//! strategy = "lateral-aware" # or "strict-fifo"
//! track_max_age = 2.0
//!
//! [kinematics]               # optional
//! k = 10
//! stop_speed_kmh = 3.0
//! stop_threshold_m = 0.15
//!
//! [[camera]]
//! id = 1
//! lambda = 0.05              # meters per pixel
//! frame_dt = 0.0333333333
//! fov = [[0.0, -22.0], [200.0, -22.0], [200.0, 22.0], [0.0, 22.0]]
//! road_frame = { origin = [0.0, 0.0], axis = [1.0, 0.0], width = 14.0, y_split = 0.0 }
//!
//! [[edge]]
//! upstream = 1
//! downstream = 2
//! overlap = [[150.0, -8.0], [200.0, -8.0], [200.0, 8.0], [150.0, 8.0]]
//! # road_frame defaults to the upstream camera's
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_text, toml_error, IoError};
use crate::engine::{CameraNode, Edge, EdgeId, MatcherConfig, Strategy, TopologyGraph};
use crate::geometry::{Point2, Polygon, RoadFrame};
use crate::kinematics::{Calibration, KinematicsConfig};
use crate::track::CameraId;

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub graph: TopologyGraph,
    pub matcher: MatcherConfig,
    pub kinematics: KinematicsConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Threshold {
    Value(f64),
    Keyword(String),
}

impl Threshold {
    fn from_opt(v: Option<f64>) -> Self {
        v.map_or_else(|| Threshold::Keyword("disabled".into()), Threshold::Value)
    }

    fn to_opt(&self, key: &str) -> Result<Option<f64>, String> {
        match self {
            Threshold::Value(v) => Ok(Some(*v)),
            Threshold::Keyword(k) if k == "disabled" => Ok(None),
            Threshold::Keyword(k) => Err(format!("matcher.{key}: expected a number or \"disabled\", got \"{k}\"")),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct MatcherDoc {
    dt_window: f64,
    eps_lat: f64,
    eps_time: f64,
    gamma_dir: Threshold,
    eps_dist: Threshold,
    strategy: Strategy,
    track_max_age: f64,
}

impl Default for MatcherDoc {
    fn default() -> Self {
        MatcherDoc::from(&MatcherConfig::default())
    }
}

impl From<&MatcherConfig> for MatcherDoc {
    fn from(c: &MatcherConfig) -> Self {
        Self {
            dt_window: c.dt_window,
            eps_lat: c.eps_lat,
            eps_time: c.eps_time,
            gamma_dir: Threshold::from_opt(c.gamma_dir),
            eps_dist: Threshold::from_opt(c.eps_dist),
            strategy: c.strategy,
            track_max_age: c.track_max_age,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameDoc {
    origin: [f64; 2],
    axis: [f64; 2],
    width: f64,
    #[serde(default)]
    y_split: f64,
}

impl From<&RoadFrame> for FrameDoc {
    fn from(f: &RoadFrame) -> Self {
        Self {
            origin: [f.origin().x, f.origin().y],
            axis: [f.axis().x, f.axis().y],
            width: f.width(),
            y_split: f.y_split(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CameraDoc {
    id: CameraId,
    lambda: f64,
    frame_dt: f64,
    fov: Vec<[f64; 2]>,
    road_frame: FrameDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    upstream: CameraId,
    downstream: CameraId,
    overlap: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    road_frame: Option<FrameDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologyDoc {
    #[serde(default)]
    matcher: MatcherDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kinematics: Option<KinematicsConfig>,
    #[serde(rename = "camera")]
    cameras: Vec<CameraDoc>,
    #[serde(rename = "edge", default)]
    edges: Vec<EdgeDoc>,
}

fn polygon(v: &[[f64; 2]]) -> Result<Polygon, String> {
    Polygon::new(v.iter().map(|p| Point2::new(p[0], p[1])).collect()).map_err(|e| e.to_string())
}

fn frame(f: &FrameDoc) -> Result<RoadFrame, String> {
    RoadFrame::new(Point2::new(f.origin[0], f.origin[1]), Point2::new(f.axis[0], f.axis[1]), f.width, f.y_split)
        .map_err(|e| e.to_string())
}

fn build(doc: TopologyDoc) -> Result<Topology, String> {
    let m = &doc.matcher;
    let matcher = MatcherConfig {
        dt_window: m.dt_window,
        eps_lat: m.eps_lat,
        eps_time: m.eps_time,
        gamma_dir: m.gamma_dir.to_opt("gamma_dir")?,
        eps_dist: m.eps_dist.to_opt("eps_dist")?,
        strategy: m.strategy,
        track_max_age: m.track_max_age,
    };
    matcher.validate().map_err(|e| e.to_string())?;
    let kinematics = doc.kinematics.unwrap_or_default();
    if kinematics.k == 0 {
        return Err("kinematics.k must be >= 1".into());
    }
    let mut nodes = Vec::new();
    for c in &doc.cameras {
        let ctx = |e: String| format!("camera {}: {e}", c.id);
        nodes.push(CameraNode {
            id: c.id,
            fov: polygon(&c.fov).map_err(ctx)?,
            calibration: Calibration::new(c.lambda, c.frame_dt).map_err(|e| ctx(e.to_string()))?,
            frame: frame(&c.road_frame).map_err(ctx)?,
        });
    }
    let mut edges = Vec::new();
    for e in &doc.edges {
        let id = EdgeId::new(e.upstream, e.downstream);
        let ctx = |m: String| format!("edge {id}: {m}");
        let road = match &e.road_frame {
            Some(f) => frame(f).map_err(ctx)?,
            None => nodes
                .iter()
                .find(|n| n.id == e.upstream)
                .map(|n| n.frame)
                .ok_or_else(|| ctx(format!("unknown camera {}", e.upstream)))?,
        };
        edges.push(Edge { id, overlap: polygon(&e.overlap).map_err(ctx)?, frame: road });
    }
    let graph = TopologyGraph::new(nodes, edges).map_err(|e| e.to_string())?;
    Ok(Topology { graph, matcher, kinematics })
}

pub fn parse_topology(path: &Path, text: &str) -> Result<Topology, IoError> {
    let doc: TopologyDoc = toml::from_str(text).map_err(|e| toml_error(path, text, e))?;
    build(doc).map_err(|m| IoError::invalid(path, m))
}

pub fn read_topology(path: &Path) -> Result<Topology, IoError> {
    let text = read_text(path)?;
    parse_topology(path, &text)
}

pub fn write_topology(topology: &Topology) -> String {
    let g = &topology.graph;
    let doc = TopologyDoc {
        matcher: MatcherDoc::from(&topology.matcher),
        kinematics: Some(topology.kinematics),
        cameras: g
            .nodes()
            .iter()
            .map(|n| CameraDoc {
                id: n.id,
                lambda: n.calibration.lambda(),
                frame_dt: n.calibration.frame_dt(),
                fov: n.fov.vertices().iter().map(|p| [p.x, p.y]).collect(),
                road_frame: FrameDoc::from(&n.frame),
            })
            .collect(),
        edges: g
            .edges()
            .iter()
            .map(|e| EdgeDoc {
                upstream: e.id.upstream,
                downstream: e.id.downstream,
                overlap: e.overlap.vertices().iter().map(|p| [p.x, p.y]).collect(),
                road_frame: Some(FrameDoc::from(&e.frame)),
            })
            .collect(),
    };
    toml::to_string(&doc).expect("topology serializes")
}
