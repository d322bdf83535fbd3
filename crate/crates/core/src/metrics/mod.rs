//! Scoring against ground truth: handover success rate, IDF1, identity
//! switches, and runtime throughput.

mod hungarian;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use serde::Serialize;

pub use hungarian::{assignment_weight, max_weight_assignment};

use crate::engine::{EngineStats, EventKind, HandoverEvent};
use crate::sim::{GroundTruth, TrueHandover, VehicleId};
use crate::track::{CameraId, GlobalId, LocalId, TrackState};

/// Outcome of one true handover.
#[derive(Debug, Clone, PartialEq)]
pub struct HandoverOutcome {
    pub handover: TrueHandover,
    /// Identity carried by the source camera when the sink first saw the
    /// vehicle.
    pub upstream: Option<GlobalId>,
    /// First identity the sink camera assigned to the vehicle.
    pub downstream: Option<GlobalId>,
    /// The sink saw the vehicle but the run ended before it decided on an
    /// identity.
    pub censored: bool,
}

impl HandoverOutcome {
    pub fn success(&self) -> bool {
        self.upstream.is_some() && self.upstream == self.downstream
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HosrReport {
    pub outcomes: Vec<HandoverOutcome>,
    /// Decided handovers; censored ones are excluded.
    pub total: usize,
    pub successful: usize,
    pub censored: usize,
    /// `None` when there are no decided handovers.
    pub hosr: Option<f64>,
}

type Labels = BTreeMap<(CameraId, LocalId), VehicleId>;

/// Output states grouped per (vehicle, camera), time-ordered.
fn per_vehicle_camera<'a>(states: &'a [TrackState], labels: &Labels) -> BTreeMap<(VehicleId, CameraId), Vec<&'a TrackState>> {
    let mut out: BTreeMap<(VehicleId, CameraId), Vec<&TrackState>> = BTreeMap::new();
    for s in states {
        if let Some(&v) = labels.get(&s.key()) {
            out.entry((v, s.camera_id)).or_default().push(s);
        }
    }
    for v in out.values_mut() {
        v.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.local_id.cmp(&b.local_id)));
    }
    out
}

/// A handover succeeds when the sink's first assigned identity equals the
/// identity the source carried at the moment the sink first saw the vehicle.
/// Handovers still undecided when the run ends are censored, not failed.
pub fn compute_hosr(truth: &GroundTruth, states: &[TrackState]) -> HosrReport {
    let labels = truth.labels();
    let grouped = per_vehicle_camera(states, &labels);
    let empty = Vec::new();
    let outcomes: Vec<HandoverOutcome> = truth
        .handovers
        .iter()
        .map(|h| {
            let src = grouped.get(&(h.vehicle, h.source)).unwrap_or(&empty);
            let upstream = src
                .iter()
                .rev()
                .find(|s| s.t <= h.t_sink_first && s.global_id.is_some())
                .or_else(|| src.iter().find(|s| s.global_id.is_some()))
                .and_then(|s| s.global_id);
            let sink = grouped.get(&(h.vehicle, h.sink)).unwrap_or(&empty);
            let downstream = sink.iter().find_map(|s| s.global_id);
            let censored = downstream.is_none() && !sink.is_empty();
            HandoverOutcome { handover: h.clone(), upstream, downstream, censored }
        })
        .collect();
    let censored = outcomes.iter().filter(|o| o.censored).count();
    let total = outcomes.len() - censored;
    let successful = outcomes.iter().filter(|o| o.success()).count();
    let hosr = (total > 0).then(|| successful as f64 / total as f64);
    HosrReport { outcomes, total, successful, censored, hosr }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Idf1Report {
    pub idtp: u64,
    pub gt_count: u64,
    pub pred_count: u64,
    /// `None` when there is nothing to score.
    pub idf1: Option<f64>,
}

/// Identity F1 over observations: a one-to-one vehicle/identity matching
/// maximizing co-occurrences gives IDTP, and
/// IDF1 = 2 IDTP / (ground-truth observations + predicted observations).
/// Observations still awaiting an identity count as misses only.
pub fn compute_idf1(truth: &GroundTruth, states: &[TrackState]) -> Idf1Report {
    let labels = truth.labels();
    let mut counts: BTreeMap<(VehicleId, GlobalId), i64> = BTreeMap::new();
    let mut gt_count = 0;
    let mut pred_count = 0;
    for s in states {
        let Some(&v) = labels.get(&s.key()) else { continue };
        gt_count += 1;
        if let Some(g) = s.global_id {
            pred_count += 1;
            *counts.entry((v, g)).or_insert(0) += 1;
        }
    }
    idf1_from_counts(&counts, gt_count, pred_count)
}

pub fn idf1_from_counts(counts: &BTreeMap<(VehicleId, GlobalId), i64>, gt_count: u64, pred_count: u64) -> Idf1Report {
    let vehicles: Vec<VehicleId> = counts.keys().map(|k| k.0).collect::<BTreeSet<_>>().into_iter().collect();
    let gids: Vec<GlobalId> = counts.keys().map(|k| k.1).collect::<BTreeSet<_>>().into_iter().collect();
    let weights: Vec<Vec<i64>> = vehicles
        .iter()
        .map(|v| gids.iter().map(|g| counts.get(&(*v, *g)).copied().unwrap_or(0)).collect())
        .collect();
    let assignment = max_weight_assignment(&weights);
    let idtp = assignment_weight(&weights, &assignment) as u64;
    let denom = gt_count + pred_count;
    let idf1 = (denom > 0).then(|| 2.0 * idtp as f64 / denom as f64);
    Idf1Report { idtp, gt_count, pred_count, idf1 }
}

/// Counts identity changes along each vehicle's observed timeline. Per
/// frame the vehicle may carry several identities (one per camera); the
/// current identity persists while it appears in the frame, otherwise the
/// lowest camera's identity takes over and a switch is counted.
pub fn count_id_switches(truth: &GroundTruth, states: &[TrackState]) -> u64 {
    let labels = truth.labels();
    let mut frames: BTreeMap<VehicleId, BTreeMap<u64, Vec<(CameraId, GlobalId)>>> = BTreeMap::new();
    for s in states {
        let (Some(&v), Some(g)) = (labels.get(&s.key()), s.global_id) else { continue };
        frames.entry(v).or_default().entry(s.frame_index).or_default().push((s.camera_id, g));
    }
    let mut switches = 0;
    for timeline in frames.values() {
        let mut current: Option<GlobalId> = None;
        for ids in timeline.values() {
            if current.is_some_and(|c| ids.iter().any(|&(_, g)| g == c)) {
                continue;
            }
            let next = ids.iter().min().map(|&(_, g)| g);
            if current.is_some() {
                switches += 1;
            }
            current = next;
        }
    }
    switches
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct EventCounts {
    pub pushed: u64,
    pub matched: u64,
    pub new_identity: u64,
    pub expired: u64,
}

impl EventCounts {
    pub fn from_events(events: &[HandoverEvent]) -> Self {
        let mut c = Self::default();
        for e in events {
            match e.kind {
                EventKind::Pushed => c.pushed += 1,
                EventKind::Matched => c.matched += 1,
                EventKind::NewIdentity => c.new_identity += 1,
                EventKind::Expired => c.expired += 1,
            }
        }
        c
    }
}

/// Parallel pairs whose sink order reversed their overlap-entry order, and
/// how many had both handovers succeed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CrossedPairReport {
    pub parallel_pairs: usize,
    pub crossed_pairs: usize,
    pub crossed_resolved: usize,
}

pub fn crossed_pair_report(truth: &GroundTruth, hosr: &HosrReport) -> CrossedPairReport {
    let ok: BTreeSet<(VehicleId, crate::engine::EdgeId)> = hosr
        .outcomes
        .iter()
        .filter(|o| o.success())
        .map(|o| (o.handover.vehicle, o.handover.edge))
        .collect();
    let crossed: Vec<_> = truth.parallel_pairs.iter().filter(|p| p.crossed).collect();
    CrossedPairReport {
        parallel_pairs: truth.parallel_pairs.len(),
        crossed_pairs: crossed.len(),
        crossed_resolved: crossed
            .iter()
            .filter(|p| ok.contains(&(p.first, p.edge)) && ok.contains(&(p.second, p.edge)))
            .count(),
    }
}

/// Accuracy summary of one run. Contains no timing, so identical inputs
/// give byte-identical serializations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub handovers_total: usize,
    pub handovers_successful: usize,
    /// Undecided at the end of the run; excluded from the rate.
    pub handovers_censored: usize,
    pub hosr: Option<f64>,
    pub idf1: Idf1Report,
    pub id_switches: u64,
    pub events: EventCounts,
    pub crossed: CrossedPairReport,
    pub identities_issued: u64,
    pub vehicles_observed: usize,
}

pub fn evaluate(truth: &GroundTruth, states: &[TrackState], events: &[HandoverEvent]) -> EvalReport {
    let hosr = compute_hosr(truth, states);
    let identities: BTreeSet<GlobalId> = states.iter().filter_map(|s| s.global_id).collect();
    let observed: BTreeSet<VehicleId> = truth.observations.iter().map(|o| o.vehicle).collect();
    EvalReport {
        handovers_total: hosr.total,
        handovers_successful: hosr.successful,
        handovers_censored: hosr.censored,
        hosr: hosr.hosr,
        idf1: compute_idf1(truth, states),
        id_switches: count_id_switches(truth, states),
        events: EventCounts::from_events(events),
        crossed: crossed_pair_report(truth, &hosr),
        identities_issued: identities.len() as u64,
        vehicles_observed: observed.len(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatencySummary {
    pub p50_us: f64,
    pub p95_us: f64,
    pub p99_us: f64,
    pub max_us: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThroughputReport {
    pub snapshots: u64,
    pub wall_s: f64,
    pub snapshots_per_s: f64,
    pub latency: Option<LatencySummary>,
    pub max_buffer_len: usize,
    pub max_total_buffered: usize,
    pub max_live_tracks: usize,
    pub max_barrier_pending: usize,
}

/// Nearest-rank percentile of a sorted slice.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

pub fn throughput_report(
    latencies: &[Duration],
    wall: Duration,
    stats: EngineStats,
    max_barrier_pending: usize,
) -> ThroughputReport {
    let mut us: Vec<f64> = latencies.iter().map(|d| d.as_secs_f64() * 1e6).collect();
    us.sort_by(f64::total_cmp);
    let latency = (!us.is_empty()).then(|| LatencySummary {
        p50_us: percentile(&us, 0.50),
        p95_us: percentile(&us, 0.95),
        p99_us: percentile(&us, 0.99),
        max_us: us[us.len() - 1],
    });
    let wall_s = wall.as_secs_f64();
    ThroughputReport {
        snapshots: stats.snapshots,
        wall_s,
        snapshots_per_s: if wall_s > 0.0 { stats.snapshots as f64 / wall_s } else { 0.0 },
        latency,
        max_buffer_len: stats.max_buffer_len,
        max_total_buffered: stats.max_total_buffered,
        max_live_tracks: stats.max_live_tracks,
        max_barrier_pending,
    }
}
