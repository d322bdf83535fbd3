use serde::{Deserialize, Serialize};

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    FreeFlow,
    Congestion,
    Overtaking,
    MergeDiverge,
}

impl Regime {
    pub const ALL: [Regime; 4] = [Regime::FreeFlow, Regime::Congestion, Regime::Overtaking, Regime::MergeDiverge];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::FreeFlow => "free-flow",
            Regime::Congestion => "congestion",
            Regime::Overtaking => "overtaking",
            Regime::MergeDiverge => "merge-diverge",
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Regime::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown regime '{s}' (expected free-flow|congestion|overtaking|merge-diverge)"))
    }
}

/// Travel direction along the corridor. East moves toward +x in the Upper
/// (negative-y) half of the road; West toward -x in the Lower half.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    East,
    West,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::East, Direction::West];

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::East => "east",
            Direction::West => "west",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    /// Standard deviation of reported ground position, meters per axis.
    pub pos_jitter_sigma: f64,
    pub dropout_prob: f64,
    /// Per-frame probability that a live local track is re-numbered.
    pub fragmentation_prob: f64,
    /// Peak longitudinal footprint drift in meters.
    pub drift_amplitude: f64,
    /// Drift oscillation period in seconds.
    pub drift_period: f64,
    /// Cameras subject to drift; empty means all.
    pub drift_cameras: Vec<u32>,
    /// Maximum arrival delay of an update, in frames.
    pub sync_jitter: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            pos_jitter_sigma: 0.0,
            dropout_prob: 0.0,
            fragmentation_prob: 0.0,
            drift_amplitude: 0.0,
            drift_period: 60.0,
            drift_cameras: Vec::new(),
            sync_jitter: 0,
        }
    }
}

impl NoiseConfig {
    pub fn is_noise_free(&self) -> bool {
        self.pos_jitter_sigma == 0.0
            && self.dropout_prob == 0.0
            && self.fragmentation_prob == 0.0
            && self.drift_amplitude == 0.0
    }
}

/// Scheduled stop: vehicles approaching `x` (world meters) in `direction`
/// halt there while the wave is active. Repeats every `period` seconds when
/// set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopWave {
    pub x: f64,
    pub direction: Direction,
    pub start: f64,
    pub duration: f64,
    #[serde(default)]
    pub period: Option<f64>,
    /// Restrict to one lane (0 is the outer lane); all lanes when unset.
    #[serde(default)]
    pub lane: Option<usize>,
}

impl StopWave {
    pub fn active(&self, t: f64) -> bool {
        if t < self.start {
            return false;
        }
        let phase = match self.period {
            Some(p) => (t - self.start) % p,
            None => t - self.start,
        };
        phase < self.duration
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedVehicle {
    pub spawn_t: f64,
    pub direction: Direction,
    pub lane: usize,
    pub speed_kmh: f64,
    #[serde(default = "default_length")]
    pub length: f64,
}

fn default_length() -> f64 {
    4.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub regime: Regime,
    pub corridor_length: f64,
    pub lanes_per_direction: usize,
    pub lane_width: f64,
    pub camera_count: usize,
    pub camera_spacing: f64,
    /// Overlap between adjacent footprints, or the gap width when
    /// `blind_gap` is set.
    pub overlap_length: f64,
    pub blind_gap: bool,
    pub duration: f64,
    pub frame_rate: f64,
    /// Background arrivals, vehicles per minute per direction.
    pub vehicle_arrival: f64,
    /// Desired speed range in km/h.
    pub speed_range: [f64; 2],
    /// Ground sampling distance, meters per pixel.
    pub lambda: f64,
    /// Footprint extent beyond each road edge, meters.
    pub side_margin: f64,
    pub noise: NoiseConfig,
    pub stop_waves: Vec<StopWave>,
    pub scripted: Vec<ScriptedVehicle>,
    /// Slow/fast overtaking pairs per minute per direction.
    pub overtaking_pairs: f64,
    /// Side-road entrants per minute per direction.
    pub merge_rate: f64,
    /// Probability that an outer-lane vehicle leaves at the side road.
    pub diverge_prob: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            regime: Regime::FreeFlow,
            corridor_length: 500.0,
            lanes_per_direction: 2,
            lane_width: 3.5,
            camera_count: 3,
            camera_spacing: 150.0,
            overlap_length: 50.0,
            blind_gap: false,
            duration: 120.0,
            frame_rate: 30.0,
            vehicle_arrival: 8.0,
            speed_range: [55.0, 90.0],
            lambda: 0.05,
            side_margin: 15.0,
            noise: NoiseConfig::default(),
            stop_waves: Vec::new(),
            scripted: Vec::new(),
            overtaking_pairs: 0.0,
            merge_rate: 0.0,
            diverge_prob: 0.0,
        }
    }
}

impl ScenarioConfig {
    /// Defaults tuned to each traffic regime.
    pub fn for_regime(regime: Regime, seed: u64) -> Self {
        let base = ScenarioConfig { seed, regime, ..Default::default() };
        match regime {
            Regime::FreeFlow => base,
            Regime::Congestion => {
                let mut c = ScenarioConfig { vehicle_arrival: 18.0, speed_range: [25.0, 45.0], ..base };
                c.stop_waves = c.default_stop_waves();
                c
            }
            Regime::Overtaking => ScenarioConfig {
                vehicle_arrival: 3.0,
                overtaking_pairs: 3.0,
                speed_range: [55.0, 75.0],
                ..base
            },
            Regime::MergeDiverge => ScenarioConfig {
                vehicle_arrival: 10.0,
                merge_rate: 3.0,
                diverge_prob: 0.35,
                ..base
            },
        }
    }

    /// Periodic stop lines in the middle of each camera's exclusive stretch.
    fn default_stop_waves(&self) -> Vec<StopWave> {
        let mut waves = Vec::new();
        for i in 0..self.camera_count {
            let (x0, x1) = self.footprint_x(i);
            let x = (x0 + x1) / 2.0;
            for (k, direction) in Direction::BOTH.into_iter().enumerate() {
                waves.push(StopWave {
                    x,
                    direction,
                    start: 15.0 + 7.0 * i as f64 + 11.0 * k as f64,
                    duration: 12.0,
                    period: Some(40.0),
                    lane: None,
                });
            }
        }
        waves
    }

    pub fn frame_dt(&self) -> f64 {
        1.0 / self.frame_rate
    }

    pub fn frame_count(&self) -> u64 {
        (self.duration * self.frame_rate).round() as u64
    }

    pub fn road_width(&self) -> f64 {
        2.0 * self.lanes_per_direction as f64 * self.lane_width
    }

    pub fn footprint_length(&self) -> f64 {
        if self.blind_gap {
            self.camera_spacing - self.overlap_length
        } else {
            self.camera_spacing + self.overlap_length
        }
    }

    /// Nominal longitudinal extent of camera `index` (0-based).
    pub fn footprint_x(&self, index: usize) -> (f64, f64) {
        let x0 = index as f64 * self.camera_spacing;
        (x0, x0 + self.footprint_length())
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        if self.camera_count == 0 {
            return bad("camera_count must be >= 1".into());
        }
        if self.lanes_per_direction == 0 {
            return bad("lanes_per_direction must be >= 1".into());
        }
        for (name, v) in [
            ("corridor_length", self.corridor_length),
            ("lane_width", self.lane_width),
            ("camera_spacing", self.camera_spacing),
            ("duration", self.duration),
            ("frame_rate", self.frame_rate),
            ("lambda", self.lambda),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be > 0, got {v}"));
            }
        }
        if !(self.overlap_length > 0.0 && self.overlap_length < self.camera_spacing) {
            return bad(format!(
                "overlap_length ({}) must lie in (0, camera_spacing = {})",
                self.overlap_length, self.camera_spacing
            ));
        }
        if !(self.side_margin >= 0.0) {
            return bad("side_margin must be >= 0".into());
        }
        let [lo, hi] = self.speed_range;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return bad(format!("speed_range must satisfy 0 < min <= max, got [{lo}, {hi}]"));
        }
        for (name, v) in [
            ("vehicle_arrival", self.vehicle_arrival),
            ("overtaking_pairs", self.overtaking_pairs),
            ("merge_rate", self.merge_rate),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be >= 0, got {v}"));
            }
        }
        let n = &self.noise;
        for (name, p) in [
            ("diverge_prob", self.diverge_prob),
            ("noise.dropout_prob", n.dropout_prob),
            ("noise.fragmentation_prob", n.fragmentation_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if !(n.pos_jitter_sigma >= 0.0 && n.drift_amplitude >= 0.0) {
            return bad("noise amplitudes must be >= 0".into());
        }
        if !(n.drift_period > 0.0) {
            return bad("noise.drift_period must be > 0".into());
        }
        for s in &self.scripted {
            if s.lane >= self.lanes_per_direction || !(s.speed_kmh > 0.0) || !(s.length > 0.0) {
                return bad(format!("invalid scripted vehicle {s:?}"));
            }
        }
        for w in &self.stop_waves {
            if !(w.duration >= 0.0) || w.period.is_some_and(|p| !(p > 0.0)) {
                return bad(format!("invalid stop wave {w:?}"));
            }
        }
        Ok(())
    }
}
