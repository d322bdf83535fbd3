//! Topology-aware handover: directional metadata buffers per edge and zone,
//! exit pushes on overlap entry, lateral-aware match-and-pop for new tracks,
//! TTL expiry and global identity allocation.
//!
//! Each snapshot is processed in two phases. Phase 1 updates kinematics and
//! runs exit logic for every already-identified track; phase 2 runs entry
//! logic for every unidentified track. Cameras are visited in ascending id
//! and tracks in ascending local id, so identical input always yields
//! identical output, and a vehicle visible on both sides of an overlap in the
//! same snapshot is handed over within that snapshot.

mod buffer;
mod config;
mod event;
mod topology;

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

pub use buffer::{BufferEntry, DirectionalBuffer, MatchQuery};
pub use config::{MatcherConfig, Strategy};
pub use event::{EventKind, HandoverEvent};
pub use topology::{CameraNode, Edge, EdgeId, TopologyGraph};

use crate::geometry::{get_zone, lateral_norm, point_in_polygon, to_road_frame, Point2, RoadFrame, Zone};
use crate::kinematics::{
    chord_speed_kmh, estimate_heading, estimate_speed, motion_status, Calibration,
    KinematicState, KinematicsConfig,
};
use crate::sync::Snapshot;
use crate::track::{CameraId, GlobalId, LocalId, TrackState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("malformed snapshot: {0}")]
    Malformed(String),
    #[error("snapshot at t={got} precedes previous snapshot t={prev}")]
    OutOfOrder { prev: f64, got: f64 },
}

/// Minimum |cos| between net travel and the road axis for the travel
/// direction to name a stream.
const TRAVEL_AXIS_COS: f64 = 0.5;
/// Net displacement in meters after which a track's travel direction is
/// fixed. Far above position jitter, so a later stop cannot flip it.
const TRAVEL_BASELINE_M: f64 = 5.0;
/// Half-width of the band around the split, as a fraction of road width,
/// inside which lateral position is too ambiguous to name a zone.
const AMBIGUOUS_BAND: f64 = 0.05;

#[derive(Debug, Clone)]
struct TrackRecord {
    global_id: Option<GlobalId>,
    t_start: f64,
    last_seen: f64,
    /// Most recent observations, oldest first: (t, pixel pos, metric pos).
    history: VecDeque<(f64, Point2, Point2)>,
    heading: Option<f64>,
    /// First metric position, the origin of net travel.
    origin: Point2,
    /// Stream implied by net travel, fixed once established.
    travel: Option<Zone>,
}

/// Buffer occupancy statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EngineStats {
    pub snapshots: u64,
    pub max_buffer_len: usize,
    pub max_total_buffered: usize,
    pub max_live_tracks: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SnapshotOutput {
    pub states: Vec<TrackState>,
    pub events: Vec<HandoverEvent>,
}

#[derive(Debug, Clone)]
pub struct Engine {
    graph: TopologyGraph,
    cfg: MatcherConfig,
    kin: KinematicsConfig,
    buffers: BTreeMap<(EdgeId, Zone), DirectionalBuffer>,
    tracks: BTreeMap<(CameraId, LocalId), TrackRecord>,
    /// Live identity counts per camera.
    live: BTreeMap<CameraId, BTreeMap<GlobalId, u32>>,
    counter: u64,
    last_t: Option<f64>,
    stats: EngineStats,
}

impl Engine {
    /// One empty buffer per (edge, zone); identity counter at zero.
    pub fn new(graph: TopologyGraph, cfg: MatcherConfig) -> Result<Self, EngineError> {
        Self::with_kinematics(graph, cfg, KinematicsConfig::default())
    }

    pub fn with_kinematics(
        graph: TopologyGraph,
        cfg: MatcherConfig,
        kin: KinematicsConfig,
    ) -> Result<Self, EngineError> {
        cfg.validate()?;
        if kin.k == 0 {
            return Err(EngineError::Config("kinematics window k must be >= 1".into()));
        }
        let buffers = graph
            .edges()
            .iter()
            .flat_map(|e| Zone::ALL.map(|z| ((e.id, z), DirectionalBuffer::new(e.id, z))))
            .collect();
        Ok(Self {
            graph,
            cfg,
            kin,
            buffers,
            tracks: BTreeMap::new(),
            live: BTreeMap::new(),
            counter: 0,
            last_t: None,
            stats: EngineStats::default(),
        })
    }

    pub fn graph(&self) -> &TopologyGraph {
        &self.graph
    }

    pub fn config(&self) -> &MatcherConfig {
        &self.cfg
    }

    pub fn buffer(&self, edge: EdgeId, zone: Zone) -> Option<&DirectionalBuffer> {
        self.buffers.get(&(edge, zone))
    }

    pub fn buffers(&self) -> impl Iterator<Item = &DirectionalBuffer> {
        self.buffers.values()
    }

    pub fn identities_issued(&self) -> u64 {
        self.counter
    }

    pub fn stats(&self) -> EngineStats {
        self.stats
    }

    /// Exit push; a repeat push of a buffered identity refreshes its entry
    /// silently.
    pub fn push_exit(&mut self, edge: EdgeId, zone: Zone, entry: BufferEntry) -> Option<HandoverEvent> {
        let buf = self.buffers.get_mut(&(edge, zone))?;
        let ev = HandoverEvent {
            t: entry.t_exit,
            kind: EventKind::Pushed,
            global_id: entry.global_id,
            edge: Some(edge),
            zone: Some(zone),
            lateral_residual: None,
            camera_id: Some(entry.source.0),
            local_id: Some(entry.source.1),
        };
        buf.push(entry).then_some(ev)
    }

    /// Match-and-pop against one buffer. The returned entry is removed.
    pub fn query_match(&mut self, edge: EdgeId, zone: Zone, query: &MatchQuery) -> Option<(BufferEntry, f64)> {
        let buf = self.buffers.get_mut(&(edge, zone))?;
        let (idx, residual) = buf.best(query, &self.cfg)?;
        buf.take(idx).map(|e| (e, residual))
    }

    /// Removes entries whose age reached `eps_time`.
    pub fn expire(&mut self, t_now: f64) -> Vec<HandoverEvent> {
        let eps = self.cfg.eps_time;
        let mut events = Vec::new();
        for ((edge, zone), buf) in self.buffers.iter_mut() {
            for e in buf.expire(t_now, eps) {
                events.push(HandoverEvent {
                    t: t_now,
                    kind: EventKind::Expired,
                    global_id: e.global_id,
                    edge: Some(*edge),
                    zone: Some(*zone),
                    lateral_residual: None,
                    camera_id: Some(e.source.0),
                    local_id: Some(e.source.1),
                });
            }
        }
        events
    }

    pub fn process_snapshot(&mut self, snapshot: &Snapshot) -> Result<SnapshotOutput, EngineError> {
        let t = snapshot.t;
        if let Some(prev) = self.last_t {
            if t < prev {
                return Err(EngineError::OutOfOrder { prev, got: t });
            }
        }
        let mut states = self.validate_snapshot(snapshot)?;
        self.last_t = Some(t);
        let mut events = Vec::new();
        let mut zones = Vec::with_capacity(states.len());

        // Phase 1: kinematics, zones, exit logic.
        for st in states.iter_mut() {
            let cal = self.graph.node(st.camera_id).map(|n| n.calibration).expect("validated camera");
            st.kin = self.update_kinematics(st, &cal);
            let zone = self.track_zone(st);
            zones.push(zone);
            if let Some(gid) = self.tracks[&st.key()].global_id {
                st.global_id = Some(gid);
                self.exit_logic(st, gid, zone, &mut events);
            }
        }

        // Phase 2: entry logic for unidentified tracks.
        for (st, &zone) in states.iter_mut().zip(&zones) {
            if st.global_id.is_none() {
                st.global_id = self.entry_logic(st, zone, &mut events);
            }
        }

        self.purge(t);
        events.extend(self.expire(t));
        self.record_stats();
        Ok(SnapshotOutput { states, events })
    }

    fn validate_snapshot(&self, snapshot: &Snapshot) -> Result<Vec<TrackState>, EngineError> {
        let mut out = Vec::new();
        for (&cam, list) in &snapshot.per_camera {
            if self.graph.node(cam).is_none() {
                return Err(EngineError::Malformed(format!("unknown camera {cam}")));
            }
            let mut sorted: Vec<&TrackState> = list.iter().collect();
            sorted.sort_by_key(|s| s.local_id);
            for w in sorted.windows(2) {
                if w[0].local_id == w[1].local_id {
                    return Err(EngineError::Malformed(format!(
                        "duplicate track (camera {cam}, local {})",
                        w[0].local_id
                    )));
                }
            }
            for s in sorted {
                if s.camera_id != cam {
                    return Err(EngineError::Malformed(format!(
                        "track of camera {} listed under camera {cam}",
                        s.camera_id
                    )));
                }
                if !s.pos.is_finite() || !s.pos_px.is_finite() {
                    return Err(EngineError::Malformed(format!(
                        "non-finite position for (camera {cam}, local {})",
                        s.local_id
                    )));
                }
                let mut s = s.clone();
                s.t = snapshot.t;
                s.global_id = None;
                out.push(s);
            }
        }
        Ok(out)
    }

    fn update_kinematics(&mut self, st: &TrackState, cal: &Calibration) -> KinematicState {
        let k = self.kin.k;
        let rec = self.tracks.entry(st.key()).or_insert_with(|| TrackRecord {
            global_id: None,
            t_start: st.t,
            last_seen: st.t,
            history: VecDeque::with_capacity(k + 1),
            heading: None,
            origin: st.pos,
            travel: None,
        });
        rec.last_seen = st.t;
        if rec.travel.is_none() {
            let frame = &self.graph.node(st.camera_id).expect("validated camera").frame;
            rec.travel = travel_zone(st.pos.sub(rec.origin), frame);
        }
        rec.history.push_back((st.t, st.pos_px, st.pos));
        while rec.history.len() > k + 1 {
            rec.history.pop_front();
        }

        let (t0, px0, m0) = rec.history[0];
        let speed = if rec.history.len() == k + 1 {
            let elapsed = st.t - t0;
            // Half a frame of slack absorbs timestamp rounding.
            let contiguous = (elapsed - k as f64 * cal.frame_dt()).abs() < 0.5 * cal.frame_dt();
            if contiguous {
                let px: Vec<Point2> = rec.history.iter().map(|h| h.1).collect();
                estimate_speed(&px, cal, k).ok()
            } else if elapsed > 0.0 {
                Some(chord_speed_kmh(px0, st.pos_px, cal.lambda(), elapsed))
            } else {
                None
            }
        } else {
            None
        };
        if rec.history.len() >= 2 {
            let held = rec.heading.unwrap_or(f64::NAN);
            let h = estimate_heading(m0, st.pos, held, self.kin.stop_threshold_m);
            rec.heading = (!h.is_nan()).then_some(h);
        }
        KinematicState {
            speed_kmh: speed,
            heading_rad: rec.heading,
            status: speed.map(|v| motion_status(v, self.kin.stop_speed_kmh)),
        }
    }

    fn track_zone(&self, st: &TrackState) -> Zone {
        let frame = &self.graph.node(st.camera_id).expect("validated camera").frame;
        resolve_zone(st.pos, self.tracks[&st.key()].travel, frame)
    }

    fn exit_logic(&mut self, st: &TrackState, gid: GlobalId, zone: Zone, events: &mut Vec<HandoverEvent>) {
        let pushes: Vec<(EdgeId, BufferEntry)> = self
            .graph
            .outgoing(st.camera_id, zone)
            .filter(|e| point_in_polygon(st.pos, &e.overlap))
            .filter(|e| !self.is_live(e.id.sink(zone), gid))
            .map(|e| {
                let entry = BufferEntry {
                    global_id: gid,
                    t_exit: st.t,
                    y_rel: y_rel(st.pos, &e.frame),
                    heading: st.kin.heading_rad,
                    pos: st.pos,
                    source: st.key(),
                };
                (e.id, entry)
            })
            .collect();
        for (edge, entry) in pushes {
            if let Some(ev) = self.push_exit(edge, zone, entry) {
                events.push(ev);
            }
        }
    }

    fn entry_logic(&mut self, st: &TrackState, zone: Zone, events: &mut Vec<HandoverEvent>) -> Option<GlobalId> {
        let rec = &self.tracks[&st.key()];
        let t_start = rec.t_start;
        let mut best: Option<(EdgeId, usize, f64, f64)> = None;
        let mut in_incoming_overlap = false;
        for e in self.graph.incoming(st.camera_id, zone) {
            in_incoming_overlap |= point_in_polygon(st.pos, &e.overlap);
            let q = MatchQuery {
                y_rel: y_rel(st.pos, &e.frame),
                heading: st.kin.heading_rad,
                pos: st.pos,
                t_ref: t_start,
            };
            let buf = &self.buffers[&(e.id, zone)];
            if let Some((idx, r)) = buf.best(&q, &self.cfg) {
                let t_exit = buf.entries().nth(idx).map(|x| x.t_exit).unwrap_or(f64::INFINITY);
                let better = match best {
                    None => true,
                    Some((_, _, br, bt)) => match self.cfg.strategy {
                        Strategy::LateralAware => r < br || (r == br && t_exit < bt),
                        Strategy::StrictFifo => t_exit < bt,
                    },
                };
                if better {
                    best = Some((e.id, idx, r, t_exit));
                }
            }
        }

        if let Some((edge, idx, residual, _)) = best {
            let entry = self.buffers.get_mut(&(edge, zone)).and_then(|b| b.take(idx)).expect("candidate exists");
            self.assign(st, entry.global_id);
            events.push(HandoverEvent {
                t: st.t,
                kind: EventKind::Matched,
                global_id: entry.global_id,
                edge: Some(edge),
                zone: Some(zone),
                lateral_residual: Some(residual),
                camera_id: Some(st.camera_id),
                local_id: Some(st.local_id),
            });
            return Some(entry.global_id);
        }

        // Inside an incoming overlap the upstream push may still be on its
        // way; hold the track until the window closes or it leaves.
        if in_incoming_overlap && st.t - t_start < self.cfg.dt_window {
            return None;
        }

        self.counter += 1;
        let gid = GlobalId(self.counter);
        self.assign(st, gid);
        events.push(HandoverEvent {
            t: st.t,
            kind: EventKind::NewIdentity,
            global_id: gid,
            edge: None,
            zone: Some(zone),
            lateral_residual: None,
            camera_id: Some(st.camera_id),
            local_id: Some(st.local_id),
        });
        Some(gid)
    }

    fn assign(&mut self, st: &TrackState, gid: GlobalId) {
        if let Some(rec) = self.tracks.get_mut(&st.key()) {
            rec.global_id = Some(gid);
        }
        *self.live.entry(st.camera_id).or_default().entry(gid).or_insert(0) += 1;
    }

    fn is_live(&self, camera: CameraId, gid: GlobalId) -> bool {
        self.live.get(&camera).is_some_and(|m| m.contains_key(&gid))
    }

    fn purge(&mut self, t: f64) {
        let max_age = self.cfg.track_max_age;
        let stale: Vec<(CameraId, LocalId)> = self
            .tracks
            .iter()
            .filter(|(_, r)| t - r.last_seen > max_age)
            .map(|(k, _)| *k)
            .collect();
        for key in stale {
            let rec = self.tracks.remove(&key).expect("present");
            if let Some(gid) = rec.global_id {
                if let Some(m) = self.live.get_mut(&key.0) {
                    if let Some(c) = m.get_mut(&gid) {
                        *c -= 1;
                        if *c == 0 {
                            m.remove(&gid);
                        }
                    }
                }
            }
        }
    }

    fn record_stats(&mut self) {
        let s = &mut self.stats;
        s.snapshots += 1;
        let mut total = 0;
        for b in self.buffers.values() {
            s.max_buffer_len = s.max_buffer_len.max(b.len());
            total += b.len();
        }
        s.max_total_buffered = s.max_total_buffered.max(total);
        s.max_live_tracks = s.max_live_tracks.max(self.tracks.len());
    }
}

pub fn y_rel(pos: Point2, frame: &RoadFrame) -> f64 {
    lateral_norm(pos, frame).expect("road frame validated at construction")
}

/// Stream named by a track's net displacement, once it is long enough and
/// runs roughly along the road (along +axis is Upper).
pub fn travel_zone(displacement: Point2, frame: &RoadFrame) -> Option<Zone> {
    let d = displacement.norm();
    let along = displacement.dot(frame.axis());
    if d < TRAVEL_BASELINE_M || along.abs() < TRAVEL_AXIS_COS * d {
        return None;
    }
    Some(if along > 0.0 { Zone::Upper } else { Zone::Lower })
}

/// Zone rule used by the engine: lateral position, except near the split
/// where an established travel direction decides.
pub fn resolve_zone(pos: Point2, travel: Option<Zone>, frame: &RoadFrame) -> Zone {
    let (_, y) = to_road_frame(pos, frame);
    match travel {
        Some(z) if (y - frame.y_split()).abs() < AMBIGUOUS_BAND * frame.width() => z,
        _ => get_zone(pos, frame),
    }
}

#[cfg(test)]
mod tests;
