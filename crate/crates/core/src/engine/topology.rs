use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::geometry::{polygons_intersect, Polygon, RoadFrame, Zone};
use crate::kinematics::Calibration;
use crate::track::CameraId;

#[derive(Debug, Clone, PartialEq)]
pub struct CameraNode {
    pub id: CameraId,
    pub fov: Polygon,
    pub calibration: Calibration,
    pub frame: RoadFrame,
}

/// Directed adjacency `upstream -> downstream`, oriented along the road axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId {
    pub upstream: CameraId,
    pub downstream: CameraId,
}

impl EdgeId {
    pub fn new(upstream: CameraId, downstream: CameraId) -> Self {
        Self { upstream, downstream }
    }

    /// Camera that pushes exits for traffic in `zone`. The Upper stream
    /// flows along the edge direction, the Lower stream against it.
    pub fn source(&self, zone: Zone) -> CameraId {
        match zone {
            Zone::Upper => self.upstream,
            Zone::Lower => self.downstream,
        }
    }

    /// Camera whose new tracks query this edge's `zone` buffer.
    pub fn sink(&self, zone: Zone) -> CameraId {
        match zone {
            Zone::Upper => self.downstream,
            Zone::Lower => self.upstream,
        }
    }

    pub fn parse(s: &str) -> Option<EdgeId> {
        let (a, b) = s.split_once("->")?;
        Some(EdgeId::new(a.trim().parse().ok()?, b.trim().parse().ok()?))
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.upstream, self.downstream)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: EdgeId,
    pub overlap: Polygon,
    /// Frame used to normalize lateral positions on both sides of the edge.
    pub frame: RoadFrame,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologyGraph {
    nodes: Vec<CameraNode>,
    edges: Vec<Edge>,
}

impl TopologyGraph {
    /// Validates ids, endpoints and that each overlap region meets both
    /// endpoint footprints.
    pub fn new(mut nodes: Vec<CameraNode>, mut edges: Vec<Edge>) -> Result<Self, EngineError> {
        nodes.sort_by_key(|n| n.id);
        edges.sort_by_key(|e| e.id);
        for w in nodes.windows(2) {
            if w[0].id == w[1].id {
                return Err(EngineError::Config(format!("duplicate camera id {}", w[0].id)));
            }
        }
        let mut seen = BTreeSet::new();
        for e in &edges {
            let id = e.id;
            if id.upstream == id.downstream {
                return Err(EngineError::Config(format!("edge {id}: self-edge")));
            }
            if !seen.insert((id.upstream.min(id.downstream), id.upstream.max(id.downstream))) {
                return Err(EngineError::Config(format!("edge {id}: duplicate camera pair")));
            }
            let find = |cid: CameraId| {
                nodes
                    .binary_search_by_key(&cid, |n| n.id)
                    .map(|i| &nodes[i])
                    .map_err(|_| EngineError::Config(format!("edge {id}: unknown camera {cid}")))
            };
            let up = find(id.upstream)?;
            let down = find(id.downstream)?;
            if !polygons_intersect(&e.overlap, &up.fov) || !polygons_intersect(&e.overlap, &down.fov) {
                return Err(EngineError::Config(format!(
                    "edge {id}: overlap polygon disjoint from an endpoint field of view (empty overlap)"
                )));
            }
        }
        Ok(Self { nodes, edges })
    }

    pub fn nodes(&self) -> &[CameraNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, id: CameraId) -> Option<&CameraNode> {
        self.nodes.binary_search_by_key(&id, |n| n.id).ok().map(|i| &self.nodes[i])
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.binary_search_by_key(&id, |e| e.id).ok().map(|i| &self.edges[i])
    }

    pub fn camera_ids(&self) -> Vec<CameraId> {
        self.nodes.iter().map(|n| n.id).collect()
    }

    /// Edges on which `camera` pushes exits for `zone`.
    pub fn outgoing(&self, camera: CameraId, zone: Zone) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.id.source(zone) == camera)
    }

    /// Edges whose `zone` buffer feeds new tracks of `camera`.
    pub fn incoming(&self, camera: CameraId, zone: Zone) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.id.sink(zone) == camera)
    }
}
