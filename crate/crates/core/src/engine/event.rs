use std::fmt;

use serde::{Deserialize, Serialize};

use super::topology::EdgeId;
use crate::geometry::Zone;
use crate::track::{CameraId, GlobalId, LocalId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Pushed,
    Matched,
    NewIdentity,
    Expired,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Pushed => "pushed",
            EventKind::Matched => "matched",
            EventKind::NewIdentity => "new_identity",
            EventKind::Expired => "expired",
        }
    }

    pub fn parse(s: &str) -> Option<EventKind> {
        Some(match s {
            "pushed" => EventKind::Pushed,
            "matched" => EventKind::Matched,
            "new_identity" => EventKind::NewIdentity,
            "expired" => EventKind::Expired,
            _ => return None,
        })
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Audit record of one handover decision.
///
/// `camera_id`/`local_id` name the track the event concerns: the pushing
/// track for `Pushed`, the receiving track for `Matched` and `NewIdentity`,
/// and the entry's source track for `Expired`.
#[derive(Debug, Clone, PartialEq)]
pub struct HandoverEvent {
    pub t: f64,
    pub kind: EventKind,
    pub global_id: GlobalId,
    pub edge: Option<EdgeId>,
    pub zone: Option<Zone>,
    pub lateral_residual: Option<f64>,
    pub camera_id: Option<CameraId>,
    pub local_id: Option<LocalId>,
}
