//! Calibrated speed, heading and motion status from position tracklets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("insufficient history: need {needed} positions, have {have}")]
    InsufficientHistory { needed: usize, have: usize },
    #[error("invalid calibration: {0}")]
    InvalidCalibration(String),
    #[error("window length k must be >= 1")]
    ZeroWindow,
}

/// Per-camera calibration. `lambda` is in meters per pixel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Calibration {
    lambda: f64,
    frame_dt: f64,
}

impl Calibration {
    pub fn new(lambda: f64, frame_dt: f64) -> Result<Self, KinematicsError> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(KinematicsError::InvalidCalibration(format!("lambda must be > 0, got {lambda}")));
        }
        if !(frame_dt.is_finite() && frame_dt > 0.0) {
            return Err(KinematicsError::InvalidCalibration(format!(
                "frame_dt must be > 0, got {frame_dt}"
            )));
        }
        Ok(Self { lambda, frame_dt })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn frame_dt(&self) -> f64 {
        self.frame_dt
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MotionStatus {
    Moving,
    Stopped,
}

/// Kinematic estimate attached to a track state. Components are `None`
/// until enough history exists to compute them.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KinematicState {
    pub speed_kmh: Option<f64>,
    pub heading_rad: Option<f64>,
    pub status: Option<MotionStatus>,
}

/// Tunables for the per-track kinematic update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KinematicsConfig {
    /// Sliding window length in frames.
    pub k: usize,
    pub stop_speed_kmh: f64,
    /// Minimum displacement in meters before heading is updated.
    pub stop_threshold_m: f64,
}

impl Default for KinematicsConfig {
    fn default() -> Self {
        Self { k: 10, stop_speed_kmh: 3.0, stop_threshold_m: 0.15 }
    }
}

/// Speed in km/h over a pixel displacement covering `elapsed_s` seconds.
pub fn chord_speed_kmh(from_px: Point2, to_px: Point2, lambda: f64, elapsed_s: f64) -> f64 {
    from_px.distance(to_px) * lambda / elapsed_s * 3.6
}

/// Sliding-window speed. `positions` holds pixel centroids at consecutive
/// frames, oldest first; the last `k + 1` are used.
pub fn estimate_speed(positions: &[Point2], cal: &Calibration, k: usize) -> Result<f64, KinematicsError> {
    if k == 0 {
        return Err(KinematicsError::ZeroWindow);
    }
    if positions.len() < k + 1 {
        return Err(KinematicsError::InsufficientHistory { needed: k + 1, have: positions.len() });
    }
    let now = positions[positions.len() - 1];
    let then = positions[positions.len() - 1 - k];
    Ok(chord_speed_kmh(then, now, cal.lambda, k as f64 * cal.frame_dt))
}

/// Heading of the displacement `prev -> curr`, held at `prev_heading` while
/// the displacement is shorter than `stop_threshold`.
pub fn estimate_heading(prev: Point2, curr: Point2, prev_heading: f64, stop_threshold: f64) -> f64 {
    let d = curr.sub(prev);
    if d.norm() >= stop_threshold {
        normalize_angle(d.y.atan2(d.x))
    } else {
        prev_heading
    }
}

pub fn motion_status(speed_kmh: f64, stop_speed_kmh: f64) -> MotionStatus {
    if speed_kmh < stop_speed_kmh {
        MotionStatus::Stopped
    } else {
        MotionStatus::Moving
    }
}

/// Maps an angle into (-π, π].
pub fn normalize_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut r = a % (2.0 * PI);
    if r <= -PI {
        r += 2.0 * PI;
    } else if r > PI {
        r -= 2.0 * PI;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn cal(lambda: f64) -> Calibration {
        Calibration::new(lambda, 1.0 / 30.0).unwrap()
    }

    #[test]
    fn stationary_window_is_zero() {
        let w = vec![Point2::new(10.0, 10.0); 11];
        assert_eq!(estimate_speed(&w, &cal(0.05), 10).unwrap(), 0.0);
    }

    #[test]
    fn direct_evaluation() {
        let mut w = vec![Point2::new(0.0, 0.0); 11];
        w[10] = Point2::new(30.0, 40.0);
        let v = estimate_speed(&w, &cal(0.05), 10).unwrap();
        assert!((v - 27.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn insufficient_history_is_an_error() {
        let w = vec![Point2::new(0.0, 0.0); 5];
        assert_eq!(
            estimate_speed(&w, &cal(0.05), 10),
            Err(KinematicsError::InsufficientHistory { needed: 11, have: 5 })
        );
        assert_eq!(estimate_speed(&w, &cal(0.05), 0), Err(KinematicsError::ZeroWindow));
    }

    #[test]
    fn calibration_rejects_nonpositive() {
        assert!(Calibration::new(0.0, 0.1).is_err());
        assert!(Calibration::new(0.05, -1.0).is_err());
    }

    #[test]
    fn heading_examples() {
        let o = Point2::new(0.0, 0.0);
        assert_eq!(estimate_heading(o, Point2::new(1.0, 0.0), 0.7, 0.15), 0.0);
        assert!((estimate_heading(o, Point2::new(0.0, 1.0), 0.7, 0.15) - FRAC_PI_2).abs() < 1e-12);
        assert_eq!(estimate_heading(o, Point2::new(0.05, 0.05), 2.0, 0.15), 2.0);
        assert_eq!(estimate_heading(o, Point2::new(-1.0, 0.0), 0.0, 0.15), PI);
    }

    #[test]
    fn status_threshold_is_strict() {
        assert_eq!(motion_status(0.0, 3.0), MotionStatus::Stopped);
        assert_eq!(motion_status(27.0, 3.0), MotionStatus::Moving);
        assert_eq!(motion_status(3.0, 3.0), MotionStatus::Moving);
    }

    #[test]
    fn normalize_range() {
        assert_eq!(normalize_angle(-PI), PI);
        assert!((normalize_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((normalize_angle(-FRAC_PI_2) + FRAC_PI_2).abs() < 1e-12);
    }
}
