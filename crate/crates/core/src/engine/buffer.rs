use std::collections::VecDeque;

use super::config::{MatcherConfig, Strategy};
use super::topology::EdgeId;
use crate::geometry::{Point2, Zone};
use crate::track::{CameraId, GlobalId, LocalId};

/// Handover metadata left behind by an exiting track.
#[derive(Debug, Clone, PartialEq)]
pub struct BufferEntry {
    pub global_id: GlobalId,
    pub t_exit: f64,
    pub y_rel: f64,
    pub heading: Option<f64>,
    /// Ground position at push time, for the optional distance gate.
    pub pos: Point2,
    /// Upstream track that produced the entry.
    pub source: (CameraId, LocalId),
}

/// What a new downstream track presents to a buffer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchQuery {
    pub y_rel: f64,
    pub heading: Option<f64>,
    pub pos: Point2,
    /// Reference time for the temporal window, normally the track's birth.
    pub t_ref: f64,
}

/// Per-edge, per-zone buffer kept sorted by `t_exit` (insertion order on ties).
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalBuffer {
    pub edge: EdgeId,
    pub zone: Zone,
    entries: VecDeque<BufferEntry>,
}

impl DirectionalBuffer {
    pub fn new(edge: EdgeId, zone: Zone) -> Self {
        Self { edge, zone, entries: VecDeque::new() }
    }

    pub fn entries(&self) -> impl Iterator<Item = &BufferEntry> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, gid: GlobalId) -> bool {
        self.entries.iter().any(|e| e.global_id == gid)
    }

    /// Inserts the entry, or refreshes the waiting entry of the same
    /// identity so its time and lateral metadata describe the latest
    /// sighting. Returns true only for a new insertion.
    pub fn push(&mut self, entry: BufferEntry) -> bool {
        let existing = self.entries.iter().position(|e| e.global_id == entry.global_id);
        if let Some(i) = existing {
            self.entries.remove(i);
        }
        let at = self.entries.partition_point(|e| e.t_exit <= entry.t_exit);
        self.entries.insert(at, entry);
        existing.is_none()
    }

    /// Best candidate index and its lateral residual, without removing it.
    pub fn best(&self, q: &MatchQuery, cfg: &MatcherConfig) -> Option<(usize, f64)> {
        let mut candidates = self
            .entries
            .iter()
            .enumerate()
            .filter(|(_, e)| (q.t_ref - e.t_exit).abs() < cfg.dt_window)
            .filter(|(_, e)| passes_direction(e, q, cfg.gamma_dir))
            .filter(|(_, e)| cfg.eps_dist.is_none_or(|d| e.pos.distance(q.pos) < d))
            .map(|(i, e)| (i, (e.y_rel - q.y_rel).abs()));
        match cfg.strategy {
            Strategy::StrictFifo => candidates.next(),
            Strategy::LateralAware => {
                // Strict `<` keeps the older entry on equal residuals.
                let best = candidates.fold(None, |acc: Option<(usize, f64)>, c| match acc {
                    Some(a) if a.1 <= c.1 => Some(a),
                    _ => Some(c),
                });
                best.filter(|&(_, r)| r < cfg.eps_lat)
            }
        }
    }

    pub fn take(&mut self, index: usize) -> Option<BufferEntry> {
        self.entries.remove(index)
    }

    /// Removes and returns entries with `t_now - t_exit >= eps_time`.
    pub fn expire(&mut self, t_now: f64, eps_time: f64) -> Vec<BufferEntry> {
        let mut out = Vec::new();
        self.entries.retain(|e| {
            if t_now - e.t_exit >= eps_time {
                out.push(e.clone());
                false
            } else {
                true
            }
        });
        out
    }
}

/// Heading gate; passes when disabled or when either heading is unknown.
fn passes_direction(e: &BufferEntry, q: &MatchQuery, gamma: Option<f64>) -> bool {
    match (gamma, e.heading, q.heading) {
        (Some(g), Some(a), Some(b)) => (a - b).cos() > g,
        _ => true,
    }
}
