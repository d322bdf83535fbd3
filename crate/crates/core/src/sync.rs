//! Global synchronization barrier.
//!
//! Per-camera updates arrive in any interleaving; snapshots are released in
//! strictly increasing frame order, each only once every registered camera
//! has delivered that frame. With a finite `max_lag`, a camera more than
//! `max_lag` frames behind the fastest one is skipped (empty, marked stalled)
//! so the consumer keeps making progress.
//!
//! `SyncBarrier` is a single-owner object. Concurrent producers share it
//! behind a `Mutex`; any serialization of their calls that respects each
//! producer's own order yields the same release sequence in strict mode.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::track::{CameraId, TrackState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SyncError {
    #[error("camera {0} is not registered with the barrier")]
    UnregisteredCamera(CameraId),
    #[error("camera {camera}: frame {got} does not follow frame {last}")]
    Causality { camera: CameraId, last: u64, got: u64 },
    #[error("invalid barrier configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamUpdate {
    pub camera_id: CameraId,
    pub frame_index: u64,
    pub t: f64,
    pub tracks: Vec<TrackState>,
    pub arrival_seq: u64,
}

/// Temporally aligned multi-camera state at one unified time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub frame_index: u64,
    pub t: f64,
    /// Exactly one entry per registered camera.
    pub per_camera: BTreeMap<CameraId, Vec<TrackState>>,
    /// Cameras released empty because they lagged beyond `max_lag`.
    pub stalled: BTreeSet<CameraId>,
}

impl Snapshot {
    pub fn track_count(&self) -> usize {
        self.per_camera.values().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierConfig {
    pub camera_ids: BTreeSet<CameraId>,
    /// `None` is the strict barrier.
    pub max_lag: Option<u64>,
    pub frame_dt: f64,
    pub start_frame: u64,
}

impl BarrierConfig {
    pub fn strict(camera_ids: impl IntoIterator<Item = CameraId>, frame_dt: f64) -> Self {
        Self { camera_ids: camera_ids.into_iter().collect(), max_lag: None, frame_dt, start_frame: 0 }
    }
}

#[derive(Debug)]
pub struct SyncBarrier {
    cfg: BarrierConfig,
    pending: BTreeMap<CameraId, BTreeMap<u64, StreamUpdate>>,
    last_ingested: BTreeMap<CameraId, u64>,
    next_frame: u64,
    late_dropped: u64,
    max_pending: usize,
}

impl SyncBarrier {
    pub fn new(cfg: BarrierConfig) -> Result<Self, SyncError> {
        if cfg.camera_ids.is_empty() {
            return Err(SyncError::Config("no cameras registered".into()));
        }
        if !(cfg.frame_dt.is_finite() && cfg.frame_dt > 0.0) {
            return Err(SyncError::Config(format!("frame_dt must be > 0, got {}", cfg.frame_dt)));
        }
        let pending = cfg.camera_ids.iter().map(|&c| (c, BTreeMap::new())).collect();
        Ok(Self {
            next_frame: cfg.start_frame,
            cfg,
            pending,
            last_ingested: BTreeMap::new(),
            late_dropped: 0,
            max_pending: 0,
        })
    }

    pub fn ingest(&mut self, update: StreamUpdate) -> Result<(), SyncError> {
        let cam = update.camera_id;
        let Some(queue) = self.pending.get_mut(&cam) else {
            return Err(SyncError::UnregisteredCamera(cam));
        };
        if let Some(&last) = self.last_ingested.get(&cam) {
            if update.frame_index <= last {
                return Err(SyncError::Causality { camera: cam, last, got: update.frame_index });
            }
        }
        self.last_ingested.insert(cam, update.frame_index);
        if update.frame_index < self.next_frame {
            // Frame already released without this camera.
            self.late_dropped += 1;
            return Ok(());
        }
        queue.insert(update.frame_index, update);
        let n = self.pending_len();
        self.max_pending = self.max_pending.max(n);
        Ok(())
    }

    pub fn try_release(&mut self) -> Option<Snapshot> {
        let frame = self.next_frame;
        let complete = self.pending.values().all(|q| q.contains_key(&frame));
        if complete {
            return Some(self.release(frame));
        }
        let lag = self.cfg.max_lag?;
        let fastest = self.last_ingested.values().copied().max()?;
        if fastest > frame && fastest - frame > lag {
            return Some(self.release(frame));
        }
        None
    }

    /// End of input: releases every remaining frame up to the last delivered
    /// one, marking cameras without data as stalled.
    pub fn flush(&mut self) -> Vec<Snapshot> {
        let mut out = Vec::new();
        while let Some(s) = self.try_release() {
            out.push(s);
        }
        let Some(last) = self.last_ingested.values().copied().max() else {
            return out;
        };
        while self.next_frame <= last {
            let f = self.next_frame;
            out.push(self.release(f));
        }
        out
    }

    fn release(&mut self, frame: u64) -> Snapshot {
        let mut per_camera = BTreeMap::new();
        let mut stalled = BTreeSet::new();
        let mut t = None;
        for (&cam, q) in self.pending.iter_mut() {
            match q.remove(&frame) {
                Some(u) => {
                    t.get_or_insert(u.t);
                    per_camera.insert(cam, u.tracks);
                }
                None => {
                    stalled.insert(cam);
                    per_camera.insert(cam, Vec::new());
                }
            }
        }
        self.next_frame = frame + 1;
        Snapshot {
            frame_index: frame,
            t: t.unwrap_or(frame as f64 * self.cfg.frame_dt),
            per_camera,
            stalled,
        }
    }

    pub fn pending_len(&self) -> usize {
        self.pending.values().map(BTreeMap::len).sum()
    }

    pub fn max_pending(&self) -> usize {
        self.max_pending
    }

    pub fn late_dropped(&self) -> u64 {
        self.late_dropped
    }

    pub fn next_frame(&self) -> u64 {
        self.next_frame
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn upd(cam: CameraId, frame: u64) -> StreamUpdate {
        StreamUpdate { camera_id: cam, frame_index: frame, t: frame as f64 * 0.1, tracks: vec![], arrival_seq: 0 }
    }

    fn barrier(max_lag: Option<u64>) -> SyncBarrier {
        let mut cfg = BarrierConfig::strict([0, 1], 0.1);
        cfg.max_lag = max_lag;
        SyncBarrier::new(cfg).unwrap()
    }

    #[test]
    fn buffers_until_all_delivered() {
        let mut b = barrier(None);
        b.ingest(upd(0, 0)).unwrap();
        assert!(b.try_release().is_none());
        b.ingest(upd(1, 0)).unwrap();
        let s = b.try_release().unwrap();
        assert_eq!(s.frame_index, 0);
        assert!(s.stalled.is_empty());
        assert_eq!(s.per_camera.len(), 2);
    }

    #[test]
    fn duplicate_frame_is_causality_error() {
        let mut b = barrier(None);
        b.ingest(upd(0, 5)).unwrap();
        assert_eq!(b.ingest(upd(0, 5)), Err(SyncError::Causality { camera: 0, last: 5, got: 5 }));
    }

    #[test]
    fn unregistered_camera() {
        let mut b = barrier(None);
        assert_eq!(b.ingest(upd(2, 0)), Err(SyncError::UnregisteredCamera(2)));
    }

    #[test]
    fn strict_barrier_waits() {
        let mut b = barrier(None);
        for f in 0..4 {
            b.ingest(upd(0, f)).unwrap();
        }
        assert!(b.try_release().is_none());
    }

    #[test]
    fn straggler_release() {
        let mut b = barrier(Some(5));
        for f in 0..=10 {
            b.ingest(upd(0, f)).unwrap();
        }
        for f in 0..=2 {
            b.ingest(upd(1, f)).unwrap();
        }
        let released: Vec<Snapshot> = std::iter::from_fn(|| b.try_release()).collect();
        let frames: Vec<u64> = released.iter().map(|s| s.frame_index).collect();
        assert_eq!(frames, vec![0, 1, 2, 3, 4]);
        assert!(released[..3].iter().all(|s| s.stalled.is_empty()));
        for s in &released[3..] {
            assert_eq!(s.stalled, BTreeSet::from([1]));
            assert!(s.per_camera[&1].is_empty());
        }
        // A late frame for an already released slot is dropped, not an error.
        b.ingest(upd(1, 3)).unwrap();
        assert_eq!(b.late_dropped(), 1);
    }

    #[test]
    fn flush_releases_tail() {
        let mut b = barrier(None);
        b.ingest(upd(0, 0)).unwrap();
        b.ingest(upd(1, 0)).unwrap();
        b.ingest(upd(0, 1)).unwrap();
        let out = b.flush();
        assert_eq!(out.len(), 2);
        assert_eq!(out[1].stalled, BTreeSet::from([1]));
    }

    #[test]
    fn config_validation() {
        assert!(SyncBarrier::new(BarrierConfig::strict([], 0.1)).is_err());
        assert!(SyncBarrier::new(BarrierConfig::strict([1], 0.0)).is_err());
    }
}
