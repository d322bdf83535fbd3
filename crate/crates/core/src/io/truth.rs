//! Ground-truth files written next to the simulated observations:
//! `truth.csv` (labelled observations, tracklet layout),
//! `truth_vehicles.csv`, `truth_trajectories.csv`, `truth_handovers.csv`
//! and `truth_pairs.csv`.

use std::collections::BTreeMap;
use std::path::Path;

use super::tracklets::{read_tracklets, write_tracklets};
use super::{f6, opt, opt_f6, write_text, IoError, Records};
use crate::engine::EdgeId;
use crate::geometry::{Point2, Zone};
use crate::sim::{
    Direction, GroundTruth, LabeledState, ParallelPair, Role, TrueHandover, TruthSample, VehicleId, VehicleInfo,
};

const VEHICLE_HEADER: [&str; 6] = ["vehicle", "direction", "role", "length_m", "desired_kmh", "spawn_t"];
const SAMPLE_HEADER: [&str; 7] = ["frame_index", "time_s", "vehicle", "x_m", "y_m", "speed_mps", "lane"];
const HANDOVER_HEADER: [&str; 9] =
    ["vehicle", "edge", "zone", "source", "sink", "t_push", "t_push_last", "t_source_last", "t_sink_first"];
const PAIR_HEADER: [&str; 6] = ["first", "second", "edge", "zone", "crossed", "lateral_gap"];

fn csv_text(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

pub fn write_truth_dir(dir: &Path, truth: &GroundTruth) -> Result<(), IoError> {
    write_tracklets(&dir.join("truth.csv"), truth.observations.iter().map(|o| (&o.state, Some(o.vehicle))))?;
    write_truth_vehicles(&dir.join("truth_vehicles.csv"), &truth.vehicles)?;
    write_truth_samples(&dir.join("truth_trajectories.csv"), &truth.samples)?;
    write_truth_handovers(&dir.join("truth_handovers.csv"), &truth.handovers)?;
    write_truth_pairs(&dir.join("truth_pairs.csv"), &truth.parallel_pairs)
}

pub fn read_truth_dir(dir: &Path) -> Result<GroundTruth, IoError> {
    let path = dir.join("truth.csv");
    let mut observations = Vec::new();
    for r in read_tracklets(&path)? {
        let vehicle = r.true_vehicle.ok_or_else(|| {
            IoError::invalid(&path, format!("observation {:?} has no true_vehicle_id", r.state.key()))
        })?;
        observations.push(LabeledState { state: r.state, vehicle });
    }
    Ok(GroundTruth {
        vehicles: read_truth_vehicles(&dir.join("truth_vehicles.csv"))?,
        samples: read_truth_samples(&dir.join("truth_trajectories.csv"))?,
        observations,
        handovers: read_truth_handovers(&dir.join("truth_handovers.csv"))?,
        parallel_pairs: read_truth_pairs(&dir.join("truth_pairs.csv"))?,
    })
}

fn write_truth_vehicles(path: &Path, vehicles: &BTreeMap<VehicleId, VehicleInfo>) -> Result<(), IoError> {
    let rows = vehicles.values().map(|v| {
        vec![
            v.id.to_string(),
            v.direction.as_str().into(),
            v.role.as_str().into(),
            f6(v.length),
            f6(v.desired_kmh),
            f6(v.spawn_t),
        ]
    });
    write_text(path, &csv_text(&VEHICLE_HEADER, rows))
}

fn read_truth_vehicles(path: &Path) -> Result<BTreeMap<VehicleId, VehicleInfo>, IoError> {
    let mut out = BTreeMap::new();
    for r in Records::read(path, &VEHICLE_HEADER)?.rows() {
        let direction = match r.str(1) {
            "east" => Direction::East,
            "west" => Direction::West,
            s => return Err(r.err(1, format!("invalid direction '{s}'"))),
        };
        let role = [Role::Background, Role::Scripted, Role::OvertakeSlow, Role::OvertakeFast, Role::Entrant, Role::Diverger]
            .into_iter()
            .find(|x| x.as_str() == r.str(2))
            .ok_or_else(|| r.err(2, format!("invalid role '{}'", r.str(2))))?;
        let id = r.parse(0, "vehicle")?;
        out.insert(
            id,
            VehicleInfo {
                id,
                direction,
                role,
                length: r.float(3, "length_m")?,
                desired_kmh: r.float(4, "desired_kmh")?,
                spawn_t: r.float(5, "spawn_t")?,
            },
        );
    }
    Ok(out)
}

pub fn write_truth_samples(path: &Path, samples: &[TruthSample]) -> Result<(), IoError> {
    let rows = samples.iter().map(|s| {
        vec![
            s.frame_index.to_string(),
            f6(s.t),
            s.vehicle.to_string(),
            f6(s.pos.x),
            f6(s.pos.y),
            f6(s.speed),
            opt(s.lane),
        ]
    });
    write_text(path, &csv_text(&SAMPLE_HEADER, rows))
}

pub fn read_truth_samples(path: &Path) -> Result<Vec<TruthSample>, IoError> {
    Records::read(path, &SAMPLE_HEADER)?
        .rows()
        .map(|r| {
            Ok(TruthSample {
                frame_index: r.parse(0, "frame_index")?,
                t: r.float(1, "time_s")?,
                vehicle: r.parse(2, "vehicle")?,
                pos: Point2::new(r.float(3, "x_m")?, r.float(4, "y_m")?),
                speed: r.float(5, "speed_mps")?,
                lane: r.opt(6, "lane")?,
            })
        })
        .collect()
}

pub fn write_truth_handovers(path: &Path, handovers: &[TrueHandover]) -> Result<(), IoError> {
    let rows = handovers.iter().map(|h| {
        vec![
            h.vehicle.to_string(),
            h.edge.to_string(),
            h.zone.as_str().into(),
            h.source.to_string(),
            h.sink.to_string(),
            opt_f6(h.t_push),
            opt_f6(h.t_push_last),
            f6(h.t_source_last),
            f6(h.t_sink_first),
        ]
    });
    write_text(path, &csv_text(&HANDOVER_HEADER, rows))
}

fn edge_zone(r: &super::Field<'_>, edge_col: usize) -> Result<(EdgeId, Zone), IoError> {
    let edge = EdgeId::parse(r.str(edge_col)).ok_or_else(|| r.err(edge_col, format!("invalid edge '{}'", r.str(edge_col))))?;
    let zone = Zone::parse(r.str(edge_col + 1))
        .ok_or_else(|| r.err(edge_col + 1, format!("invalid zone '{}'", r.str(edge_col + 1))))?;
    Ok((edge, zone))
}

pub fn read_truth_handovers(path: &Path) -> Result<Vec<TrueHandover>, IoError> {
    Records::read(path, &HANDOVER_HEADER)?
        .rows()
        .map(|r| {
            let (edge, zone) = edge_zone(&r, 1)?;
            Ok(TrueHandover {
                vehicle: r.parse(0, "vehicle")?,
                edge,
                zone,
                source: r.parse(3, "source")?,
                sink: r.parse(4, "sink")?,
                t_push: r.opt_float(5, "t_push")?,
                t_push_last: r.opt_float(6, "t_push_last")?,
                t_source_last: r.float(7, "t_source_last")?,
                t_sink_first: r.float(8, "t_sink_first")?,
            })
        })
        .collect()
}

pub fn write_truth_pairs(path: &Path, pairs: &[ParallelPair]) -> Result<(), IoError> {
    let rows = pairs.iter().map(|p| {
        vec![
            p.first.to_string(),
            p.second.to_string(),
            p.edge.to_string(),
            p.zone.as_str().into(),
            p.crossed.to_string(),
            if p.lateral_gap.is_finite() { f6(p.lateral_gap) } else { "NA".into() },
        ]
    });
    write_text(path, &csv_text(&PAIR_HEADER, rows))
}

pub fn read_truth_pairs(path: &Path) -> Result<Vec<ParallelPair>, IoError> {
    Records::read(path, &PAIR_HEADER)?
        .rows()
        .map(|r| {
            let (edge, zone) = edge_zone(&r, 2)?;
            Ok(ParallelPair {
                first: r.parse(0, "first")?,
                second: r.parse(1, "second")?,
                edge,
                zone,
                crossed: r.parse(4, "crossed")?,
                lateral_gap: r.opt_float(5, "lateral_gap")?.unwrap_or(f64::NAN),
            })
        })
        .collect()
}
