//! Ground truth: vehicle trajectories, observation labels, and the
//! handovers and parallel pairs implied by what the cameras actually saw.

use std::collections::BTreeMap;

use super::config::Direction;
use super::traffic::VehicleInfo;
use crate::engine::{y_rel, EdgeId, TopologyGraph};
use crate::geometry::{point_in_polygon, Point2, Zone};
use crate::track::{CameraId, LocalId, TrackState};

pub type VehicleId = u64;

#[derive(Debug, Clone, PartialEq)]
pub struct TruthSample {
    pub frame_index: u64,
    pub t: f64,
    pub vehicle: VehicleId,
    pub pos: Point2,
    /// Meters per second.
    pub speed: f64,
    pub lane: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledState {
    pub state: TrackState,
    pub vehicle: VehicleId,
}

/// One vehicle's passage from a source camera to the next camera along
/// its direction of travel.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueHandover {
    pub vehicle: VehicleId,
    pub edge: EdgeId,
    pub zone: Zone,
    pub source: CameraId,
    pub sink: CameraId,
    /// First source observation inside the edge overlap region.
    pub t_push: Option<f64>,
    /// Last source observation inside the edge overlap region.
    pub t_push_last: Option<f64>,
    pub t_source_last: f64,
    pub t_sink_first: f64,
}

/// Two vehicles inside the same overlap region and zone at the same time.
#[derive(Debug, Clone, PartialEq)]
pub struct ParallelPair {
    /// Entered the overlap first.
    pub first: VehicleId,
    pub second: VehicleId,
    pub edge: EdgeId,
    pub zone: Zone,
    /// The sink camera saw `second` before `first`.
    pub crossed: bool,
    /// |Δy_rel| when both were inside.
    pub lateral_gap: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruth {
    pub vehicles: BTreeMap<VehicleId, VehicleInfo>,
    pub samples: Vec<TruthSample>,
    pub observations: Vec<LabeledState>,
    pub handovers: Vec<TrueHandover>,
    pub parallel_pairs: Vec<ParallelPair>,
}

pub fn zone_of(direction: Direction) -> Zone {
    match direction {
        Direction::East => Zone::Upper,
        Direction::West => Zone::Lower,
    }
}

impl GroundTruth {
    pub fn derive(
        vehicles: BTreeMap<VehicleId, VehicleInfo>,
        samples: Vec<TruthSample>,
        observations: Vec<LabeledState>,
        graph: &TopologyGraph,
    ) -> Self {
        let handovers = derive_handovers(&vehicles, &observations, graph);
        let parallel_pairs = derive_parallel_pairs(&handovers, &samples, graph);
        Self { vehicles, samples, observations, handovers, parallel_pairs }
    }

    /// (camera, local id) to the vehicle behind it.
    pub fn labels(&self) -> BTreeMap<(CameraId, LocalId), VehicleId> {
        self.observations.iter().map(|o| (o.state.key(), o.vehicle)).collect()
    }

    pub fn handovers_of(&self, vehicle: VehicleId) -> impl Iterator<Item = &TrueHandover> {
        self.handovers.iter().filter(move |h| h.vehicle == vehicle)
    }
}

struct CameraSpan<'a> {
    first: f64,
    last: f64,
    observations: Vec<&'a LabeledState>,
}

pub fn derive_handovers(
    vehicles: &BTreeMap<VehicleId, VehicleInfo>,
    observations: &[LabeledState],
    graph: &TopologyGraph,
) -> Vec<TrueHandover> {
    let mut spans: BTreeMap<VehicleId, BTreeMap<CameraId, CameraSpan>> = BTreeMap::new();
    for o in observations {
        let span = spans.entry(o.vehicle).or_default().entry(o.state.camera_id).or_insert(CameraSpan {
            first: o.state.t,
            last: o.state.t,
            observations: Vec::new(),
        });
        span.first = span.first.min(o.state.t);
        span.last = span.last.max(o.state.t);
        span.observations.push(o);
    }
    let mut out = Vec::new();
    for (&vehicle, cams) in &spans {
        let Some(info) = vehicles.get(&vehicle) else { continue };
        let zone = zone_of(info.direction);
        let mut order: Vec<(&CameraId, &CameraSpan)> = cams.iter().collect();
        order.sort_by(|a, b| a.1.first.total_cmp(&b.1.first).then(a.0.cmp(b.0)));
        for w in order.windows(2) {
            let (&a, sa) = w[0];
            let (&b, sb) = w[1];
            let Some(edge) = graph.edges().iter().find(|e| e.id.source(zone) == a && e.id.sink(zone) == b) else {
                continue;
            };
            let inside: Vec<f64> = sa
                .observations
                .iter()
                .filter(|o| point_in_polygon(o.state.pos, &edge.overlap))
                .map(|o| o.state.t)
                .collect();
            out.push(TrueHandover {
                vehicle,
                edge: edge.id,
                zone,
                source: a,
                sink: b,
                t_push: inside.iter().copied().reduce(f64::min),
                t_push_last: inside.iter().copied().reduce(f64::max),
                t_source_last: sa.last,
                t_sink_first: sb.first,
            });
        }
    }
    out.sort_by(|a, b| a.t_sink_first.total_cmp(&b.t_sink_first).then(a.vehicle.cmp(&b.vehicle)));
    out
}

fn derive_parallel_pairs(handovers: &[TrueHandover], samples: &[TruthSample], graph: &TopologyGraph) -> Vec<ParallelPair> {
    let mut by_vehicle: BTreeMap<VehicleId, BTreeMap<u64, Point2>> = BTreeMap::new();
    let mut frame_of_t: BTreeMap<u64, u64> = BTreeMap::new();
    for s in samples {
        by_vehicle.entry(s.vehicle).or_default().insert(s.frame_index, s.pos);
        frame_of_t.insert(s.t.to_bits(), s.frame_index);
    }
    let mut groups: BTreeMap<(EdgeId, Zone), Vec<&TrueHandover>> = BTreeMap::new();
    for h in handovers.iter().filter(|h| h.t_push.is_some()) {
        groups.entry((h.edge, h.zone)).or_default().push(h);
    }
    let mut out = Vec::new();
    for ((edge, zone), mut hs) in groups {
        hs.sort_by(|a, b| a.t_push.unwrap().total_cmp(&b.t_push.unwrap()).then(a.vehicle.cmp(&b.vehicle)));
        let frame = graph.edge(edge).expect("edge exists").frame;
        for (i, a) in hs.iter().enumerate() {
            for b in &hs[i + 1..] {
                let (a0, a1) = (a.t_push.unwrap(), a.t_push_last.unwrap());
                let b0 = b.t_push.unwrap();
                if b0 > a1 {
                    break;
                }
                let gap = frame_of_t
                    .get(&b0.to_bits())
                    .and_then(|f| Some((by_vehicle.get(&a.vehicle)?.get(f)?, by_vehicle.get(&b.vehicle)?.get(f)?)))
                    .map(|(pa, pb)| (y_rel(*pa, &frame) - y_rel(*pb, &frame)).abs())
                    .unwrap_or(f64::NAN);
                let crossed = a0 < b0 && b.t_sink_first < a.t_sink_first;
                out.push(ParallelPair { first: a.vehicle, second: b.vehicle, edge, zone, crossed, lateral_gap: gap });
            }
        }
    }
    out
}
