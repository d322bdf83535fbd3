use std::collections::BTreeMap;
use std::path::Path;

use super::{f6, opt, opt_f6, write_text, IoError, Records};
use crate::geometry::Point2;
use crate::kinematics::KinematicState;
use crate::sim::quantize;
use crate::sync::StreamUpdate;
use crate::track::{CameraId, GlobalId, TrackState};

pub const TRACKLET_HEADER: [&str; 12] = [
    "frame_index",
    "time_s",
    "camera_id",
    "local_id",
    "x_px",
    "y_px",
    "x_m",
    "y_m",
    "speed_kmh",
    "heading_rad",
    "global_id",
    "true_vehicle_id",
];

#[derive(Debug, Clone, PartialEq)]
pub struct TrackletRecord {
    pub state: TrackState,
    pub true_vehicle: Option<u64>,
}

/// Writes records sorted by (frame, camera, local id).
pub fn write_tracklets<'a, I>(path: &Path, records: I) -> Result<(), IoError>
where
    I: IntoIterator<Item = (&'a TrackState, Option<u64>)>,
{
    let mut rows: Vec<(&TrackState, Option<u64>)> = records.into_iter().collect();
    rows.sort_by_key(|(s, _)| (s.frame_index, s.camera_id, s.local_id));
    let mut out = TRACKLET_HEADER.join(",");
    out.push('\n');
    for (s, v) in rows {
        let fields = [
            s.frame_index.to_string(),
            f6(s.t),
            s.camera_id.to_string(),
            s.local_id.to_string(),
            f6(s.pos_px.x),
            f6(s.pos_px.y),
            f6(s.pos.x),
            f6(s.pos.y),
            opt_f6(s.kin.speed_kmh),
            opt_f6(s.kin.heading_rad),
            opt(s.global_id),
            opt(v),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    write_text(path, &out)
}

pub fn read_tracklets(path: &Path) -> Result<Vec<TrackletRecord>, IoError> {
    let records = Records::read(path, &TRACKLET_HEADER)?;
    let mut out: Vec<TrackletRecord> = Vec::new();
    let mut last: Option<(u64, CameraId, u64)> = None;
    for r in records.rows() {
        let state = TrackState {
            frame_index: r.parse(0, "frame_index")?,
            t: r.float(1, "time_s")?,
            camera_id: r.parse(2, "camera_id")?,
            local_id: r.parse(3, "local_id")?,
            pos_px: Point2::new(r.float(4, "x_px")?, r.float(5, "y_px")?),
            pos: Point2::new(r.float(6, "x_m")?, r.float(7, "y_m")?),
            kin: KinematicState {
                speed_kmh: r.opt_float(8, "speed_kmh")?,
                heading_rad: r.opt_float(9, "heading_rad")?,
                status: None,
            },
            global_id: r.opt::<u64>(10, "global_id")?.map(GlobalId),
        };
        let key = (state.frame_index, state.camera_id, state.local_id);
        if last.is_some_and(|l| key <= l) {
            return Err(r.err(0, "records not sorted by (frame_index, camera_id, local_id)"));
        }
        last = Some(key);
        out.push(TrackletRecord { state, true_vehicle: r.opt(11, "true_vehicle_id")? });
    }
    Ok(out)
}

/// Rebuilds per-camera updates, one per camera and frame, in frame-major
/// order. Frames with no records become empty updates timed at
/// `frame * frame_dt`. The frame range runs from 0 to `frame_count` when
/// given, else to the last recorded frame.
pub fn updates_from_states(
    states: &[TrackState],
    camera_ids: &[CameraId],
    frame_dt: f64,
    frame_count: Option<u64>,
) -> Vec<StreamUpdate> {
    let mut grouped: BTreeMap<(u64, CameraId), Vec<TrackState>> = BTreeMap::new();
    for s in states {
        let mut s = s.clone();
        s.kin = KinematicState::default();
        s.global_id = None;
        grouped.entry((s.frame_index, s.camera_id)).or_default().push(s);
    }
    let end = frame_count.unwrap_or_else(|| states.iter().map(|s| s.frame_index + 1).max().unwrap_or(0));
    let mut out = Vec::new();
    for frame in 0..end {
        for &cam in camera_ids {
            let tracks = grouped.remove(&(frame, cam)).unwrap_or_default();
            let t = tracks.first().map_or_else(|| quantize(frame as f64 * frame_dt), |s| s.t);
            let seq = out.len() as u64;
            out.push(StreamUpdate { camera_id: cam, frame_index: frame, t, tracks, arrival_seq: seq });
        }
    }
    out
}
