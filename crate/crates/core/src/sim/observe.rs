//! Aerial camera model: footprint with optional longitudinal drift, a
//! detection margin of half the vehicle length, dropout, identity
//! fragmentation and positional jitter.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::config::NoiseConfig;
use super::traffic::VehicleState;
use crate::geometry::Point2;
use crate::kinematics::KinematicState;
use crate::track::{CameraId, LocalId, TrackState};

/// Frames a local identity survives without detections.
pub const LOST_FRAMES: u64 = 30;

/// Rounds to the 6-decimal precision used by every file format. The result
/// is the double nearest a 6-decimal number, so it survives a write/read
/// cycle unchanged.
pub fn quantize(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

#[derive(Debug, Clone)]
pub(crate) struct CameraModel {
    pub id: CameraId,
    x0: f64,
    x1: f64,
    lateral: f64,
    lambda: f64,
    drift_amplitude: f64,
    drift_period: f64,
    drift_phase: f64,
    dropout_prob: f64,
    fragmentation_prob: f64,
    sigma: f64,
    rng: ChaCha8Rng,
    /// vehicle -> (local id, last frame detected)
    identities: BTreeMap<u64, (LocalId, u64)>,
    next_local: LocalId,
}

impl CameraModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: CameraId,
        x_range: (f64, f64),
        lateral: f64,
        lambda: f64,
        noise: &NoiseConfig,
        drifting: bool,
        drift_phase: f64,
        rng: ChaCha8Rng,
    ) -> Self {
        Self {
            id,
            x0: x_range.0,
            x1: x_range.1,
            lateral,
            lambda,
            drift_amplitude: if drifting { noise.drift_amplitude } else { 0.0 },
            drift_period: noise.drift_period,
            drift_phase,
            dropout_prob: noise.dropout_prob,
            fragmentation_prob: noise.fragmentation_prob,
            sigma: noise.pos_jitter_sigma,
            rng,
            identities: BTreeMap::new(),
            next_local: 1,
        }
    }

    /// Longitudinal footprint displacement at time `t`.
    pub fn drift(&self, t: f64) -> f64 {
        if self.drift_amplitude == 0.0 {
            return 0.0;
        }
        self.drift_amplitude * (TAU * t / self.drift_period + self.drift_phase).sin()
    }

    /// Detections for one frame, sorted by local id, with the true vehicle
    /// behind each. `vehicles` must be sorted by id.
    pub fn observe(&mut self, frame: u64, t: f64, vehicles: &[VehicleState]) -> Vec<(TrackState, u64)> {
        let d = self.drift(t);
        let origin = Point2::new(self.x0 + d, -self.lateral);
        let nominal = Point2::new(self.x0, -self.lateral);
        let mut out = Vec::new();
        for v in vehicles {
            let h = v.length / 2.0;
            let p = v.pos;
            if p.x < self.x0 + d + h || p.x > self.x1 + d - h || p.y.abs() > self.lateral {
                continue;
            }
            // Fixed draw count per visible vehicle keeps streams aligned.
            let u_drop: f64 = self.rng.random();
            let u_frag: f64 = self.rng.random();
            let nx: f64 = self.rng.sample(StandardNormal);
            let ny: f64 = self.rng.sample(StandardNormal);
            if u_drop < self.dropout_prob {
                continue;
            }
            let local = match self.identities.get(&v.id) {
                Some(&(l, last)) if frame - last <= LOST_FRAMES && u_frag >= self.fragmentation_prob => l,
                _ => {
                    let l = self.next_local;
                    self.next_local += 1;
                    l
                }
            };
            self.identities.insert(v.id, (local, frame));
            let seen = Point2::new(p.x + self.sigma * nx, p.y + self.sigma * ny);
            let px = Point2::new(
                quantize((seen.x - origin.x) / self.lambda),
                quantize((seen.y - origin.y) / self.lambda),
            );
            // The camera believes it sits at its nominal footprint.
            let pos = Point2::new(
                quantize(nominal.x + px.x * self.lambda),
                quantize(nominal.y + px.y * self.lambda),
            );
            let state = TrackState {
                frame_index: frame,
                t,
                camera_id: self.id,
                local_id: local,
                pos,
                pos_px: px,
                kin: KinematicState::default(),
                global_id: None,
            };
            out.push((state, v.id));
        }
        out.sort_by_key(|(s, _)| s.local_id);
        out
    }
}
