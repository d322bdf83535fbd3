//! Track observations, local tracklets and stitched global trajectories.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::kinematics::KinematicState;

pub type CameraId = u32;
pub type LocalId = u64;

/// Network-wide vehicle identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GlobalId(pub u64);

impl fmt::Display for GlobalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One timestamped observation of one vehicle by one camera.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackState {
    pub frame_index: u64,
    pub t: f64,
    pub camera_id: CameraId,
    pub local_id: LocalId,
    /// Ground-plane position in meters.
    pub pos: Point2,
    /// Image-plane centroid in pixels.
    pub pos_px: Point2,
    pub kin: KinematicState,
    pub global_id: Option<GlobalId>,
}

impl TrackState {
    pub fn key(&self) -> (CameraId, LocalId) {
        (self.camera_id, self.local_id)
    }
}

/// A camera-local identity's time-ordered state sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTracklet {
    pub camera_id: CameraId,
    pub local_id: LocalId,
    states: Vec<TrackState>,
}

impl LocalTracklet {
    pub fn new(first: TrackState) -> Self {
        Self { camera_id: first.camera_id, local_id: first.local_id, states: vec![first] }
    }

    /// Appends a state; returns it back if it belongs to another tracklet or
    /// does not advance time.
    pub fn push(&mut self, state: TrackState) -> Result<(), TrackState> {
        let last_t = self.t_end();
        if state.key() != (self.camera_id, self.local_id) || state.t <= last_t {
            return Err(state);
        }
        self.states.push(state);
        Ok(())
    }

    pub fn states(&self) -> &[TrackState] {
        &self.states
    }

    pub fn t_start(&self) -> f64 {
        self.states[0].t
    }

    pub fn t_end(&self) -> f64 {
        self.states[self.states.len() - 1].t
    }
}

/// Groups states into tracklets keyed by (camera, local id). Input order is
/// preserved within each tracklet; states that fail to advance time are
/// dropped.
pub fn group_tracklets<'a, I>(states: I) -> BTreeMap<(CameraId, LocalId), LocalTracklet>
where
    I: IntoIterator<Item = &'a TrackState>,
{
    let mut out: BTreeMap<(CameraId, LocalId), LocalTracklet> = BTreeMap::new();
    for s in states {
        match out.get_mut(&s.key()) {
            Some(tl) => {
                let _ = tl.push(s.clone());
            }
            None => {
                out.insert(s.key(), LocalTracklet::new(s.clone()));
            }
        }
    }
    out
}

/// Cross-camera trajectory under one global identity.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GlobalTrajectory {
    pub global_id: Option<GlobalId>,
    pub states: Vec<TrackState>,
}

impl GlobalTrajectory {
    pub fn cameras(&self) -> Vec<CameraId> {
        let mut seen = Vec::new();
        for s in &self.states {
            if !seen.contains(&s.camera_id) {
                seen.push(s.camera_id);
            }
        }
        seen
    }
}

/// Accumulates engine output into per-identity trajectories.
#[derive(Debug, Default)]
pub struct TrajectoryStore {
    trajectories: BTreeMap<GlobalId, GlobalTrajectory>,
    all: Vec<TrackState>,
}

impl TrajectoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn extend(&mut self, states: &[TrackState]) {
        for s in states {
            if let Some(g) = s.global_id {
                self.trajectories
                    .entry(g)
                    .or_insert_with(|| GlobalTrajectory { global_id: Some(g), states: Vec::new() })
                    .states
                    .push(s.clone());
            }
            self.all.push(s.clone());
        }
    }

    pub fn trajectories(&self) -> &BTreeMap<GlobalId, GlobalTrajectory> {
        &self.trajectories
    }

    /// Every processed state, including those still awaiting an identity.
    pub fn states(&self) -> &[TrackState] {
        &self.all
    }

    pub fn into_states(self) -> Vec<TrackState> {
        self.all
    }
}
