use serde::{Deserialize, Serialize};

use super::EngineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Minimum lateral residual within the temporal window, gated by `eps_lat`.
    LateralAware,
    /// Oldest in-window entry, ignoring lateral metadata. Ablation baseline.
    StrictFifo,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::LateralAware => "lateral-aware",
            Strategy::StrictFifo => "strict-fifo",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lateral-aware" => Ok(Strategy::LateralAware),
            "strict-fifo" => Ok(Strategy::StrictFifo),
            other => Err(format!("unknown strategy '{other}' (expected lateral-aware|strict-fifo)")),
        }
    }
}

/// Matching thresholds. `gamma_dir` and `eps_dist` are `None` when disabled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatcherConfig {
    /// Temporal search window in seconds.
    pub dt_window: f64,
    /// Lateral gate on |Δy_rel|.
    pub eps_lat: f64,
    /// Buffer entry time-to-live in seconds.
    pub eps_time: f64,
    /// Minimum heading cosine between exit and entry.
    pub gamma_dir: Option<f64>,
    /// Maximum exit-to-entry distance in meters.
    pub eps_dist: Option<f64>,
    pub strategy: Strategy,
    /// Seconds an unseen local track is remembered before it is dropped.
    pub track_max_age: f64,
}

impl Default for MatcherConfig {
    fn default() -> Self {
        Self {
            dt_window: 4.0,
            eps_lat: 0.12,
            eps_time: 30.0,
            gamma_dir: None,
            eps_dist: None,
            strategy: Strategy::LateralAware,
            track_max_age: 2.0,
        }
    }
}

impl MatcherConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: String| Err(EngineError::Config(m));
        if !(self.dt_window.is_finite() && self.dt_window > 0.0) {
            return bad(format!("dt_window must be > 0, got {}", self.dt_window));
        }
        if !(self.eps_lat.is_finite() && self.eps_lat > 0.0) {
            return bad(format!("eps_lat must be > 0, got {}", self.eps_lat));
        }
        if !(self.eps_time.is_finite() && self.eps_time >= self.dt_window) {
            return bad(format!(
                "eps_time ({}) must be >= dt_window ({})",
                self.eps_time, self.dt_window
            ));
        }
        if let Some(g) = self.gamma_dir {
            if !(-1.0..=1.0).contains(&g) {
                return bad(format!("gamma_dir must lie in [-1, 1], got {g}"));
            }
        }
        if let Some(d) = self.eps_dist {
            if !(d.is_finite() && d > 0.0) {
                return bad(format!("eps_dist must be > 0, got {d}"));
            }
        }
        if !(self.track_max_age.is_finite() && self.track_max_age > 0.0) {
            return bad(format!("track_max_age must be > 0, got {}", self.track_max_age));
        }
        Ok(())
    }
}
