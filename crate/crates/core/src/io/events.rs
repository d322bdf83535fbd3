use std::path::Path;

use super::{f6, opt, opt_f6, write_text, IoError, Records};
use crate::engine::{EdgeId, EventKind, HandoverEvent};
use crate::geometry::Zone;
use crate::track::GlobalId;

pub const EVENT_HEADER: [&str; 8] =
    ["time_s", "kind", "global_id", "edge", "zone", "lateral_residual", "camera_id", "local_id"];

/// Writes events in the given order, which the engine emits time-ordered.
pub fn write_events(path: &Path, events: &[HandoverEvent]) -> Result<(), IoError> {
    write_text(path, &events_to_string(events))
}

pub fn events_to_string(events: &[HandoverEvent]) -> String {
    let mut out = EVENT_HEADER.join(",");
    out.push('\n');
    for e in events {
        let fields = [
            f6(e.t),
            e.kind.as_str().to_string(),
            e.global_id.to_string(),
            opt(e.edge),
            opt(e.zone.map(Zone::as_str)),
            opt_f6(e.lateral_residual),
            opt(e.camera_id),
            opt(e.local_id),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn read_events(path: &Path) -> Result<Vec<HandoverEvent>, IoError> {
    let records = Records::read(path, &EVENT_HEADER)?;
    let mut out: Vec<HandoverEvent> = Vec::new();
    for r in records.rows() {
        let t = r.float(0, "time_s")?;
        if out.last().is_some_and(|p| t < p.t) {
            return Err(r.err(0, "events not time-ordered"));
        }
        let kind = EventKind::parse(r.str(1)).ok_or_else(|| r.err(1, format!("unknown event kind '{}'", r.str(1))))?;
        let edge = match r.str(3) {
            "NA" => None,
            s => Some(EdgeId::parse(s).ok_or_else(|| r.err(3, format!("invalid edge '{s}'")))?),
        };
        let zone = match r.str(4) {
            "NA" => None,
            s => Some(Zone::parse(s).ok_or_else(|| r.err(4, format!("invalid zone '{s}'")))?),
        };
        out.push(HandoverEvent {
            t,
            kind,
            global_id: GlobalId(r.parse(2, "global_id")?),
            edge,
            zone,
            lateral_residual: r.opt_float(5, "lateral_residual")?,
            camera_id: r.opt(6, "camera_id")?,
            local_id: r.opt(7, "local_id")?,
        });
    }
    Ok(out)
}
