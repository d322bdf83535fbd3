mod common;

use std::sync::OnceLock;

use handover_core::engine::MatcherConfig;
use handover_core::geometry::{get_zone, to_road_frame, Point2, Polygon, RoadFrame};
use handover_core::metrics::{compute_hosr, compute_idf1, count_id_switches};
use handover_core::sim::{GroundTruth, Regime};
use handover_core::sync::{BarrierConfig, StreamUpdate, SyncBarrier};
use handover_core::track::{GlobalId, TrackState};
use proptest::prelude::*;

fn pt(x: f64, y: f64) -> Point2 {
    Point2 { x, y }
}

fn rigid(p: Point2, theta: f64, offset: Point2) -> Point2 {
    let (s, c) = theta.sin_cos();
    pt(c * p.x - s * p.y + offset.x, s * p.x + c * p.y + offset.y)
}

fn segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b.sub(a);
    let t = (p.sub(a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
    p.distance(a.add(ab.scale(t)))
}

/// Star-shaped polygon around the origin from sorted angles and radii.
fn star(radii: &[f64]) -> Vec<Point2> {
    let n = radii.len() as f64;
    radii
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let a = i as f64 / n * std::f64::consts::TAU;
            pt(r * a.cos(), r * a.sin())
        })
        .collect()
}

/// A short mixed run shared by the metric properties.
fn run() -> &'static (GroundTruth, Vec<TrackState>) {
    static RUN: OnceLock<(GroundTruth, Vec<TrackState>)> = OnceLock::new();
    RUN.get_or_init(|| {
        let cfg = handover_core::sim::ScenarioConfig { duration: 60.0, ..common::fixture(Regime::Overtaking, 6) };
        let out = common::simulate(&cfg);
        let matcher = MatcherConfig { strategy: handover_core::engine::Strategy::StrictFifo, ..Default::default() };
        let (run, _) = common::stitch(&out, matcher);
        (out.truth, run.states)
    })
}

fn relabel(states: &[TrackState], f: impl Fn(u64) -> u64) -> Vec<TrackState> {
    states
        .iter()
        .cloned()
        .map(|mut s| {
            s.global_id = s.global_id.map(|g| GlobalId(f(g.0)));
            s
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn containment_survives_rigid_motion(
        radii in prop::collection::vec(1.0f64..10.0, 3..12),
        px in -12.0f64..12.0, py in -12.0f64..12.0,
        theta in -3.2f64..3.2, ox in -1e3f64..1e3, oy in -1e3f64..1e3,
    ) {
        let verts = star(&radii);
        let p = pt(px, py);
        let n = verts.len();
        let clearance = (0..n).map(|i| segment_distance(p, verts[i], verts[(i + 1) % n])).fold(f64::INFINITY, f64::min);
        prop_assume!(clearance > 1e-6);
        let poly = Polygon::new(verts.clone()).unwrap();
        let off = pt(ox, oy);
        let moved = Polygon::new(verts.iter().map(|&v| rigid(v, theta, off)).collect()).unwrap();
        prop_assert_eq!(poly.contains(p), moved.contains(rigid(p, theta, off)));
    }

    #[test]
    fn zone_depends_only_on_lateral_offset(
        theta in -3.2f64..3.2, s in -500.0f64..500.0, ds in -500.0f64..500.0,
        y in -10.0f64..10.0, split in -8.0f64..8.0,
    ) {
        prop_assume!((y - split).abs() > 1e-6);
        let axis = pt(theta.cos(), theta.sin());
        let frame = RoadFrame::new(pt(10.0, -4.0), axis, 20.0, split).unwrap();
        let p = frame.to_world(s, y);
        let (s2, y2) = to_road_frame(p, &frame);
        prop_assert!((s2 - s).abs() < 1e-9 && (y2 - y).abs() < 1e-9);
        prop_assert_eq!(get_zone(p, &frame), get_zone(frame.to_world(s + ds, y), &frame));
    }

    #[test]
    fn barrier_output_ignores_arrival_interleaving(choices in prop::collection::vec(0usize..3, 0..200), frames in 1u64..30) {
        let cams = [1u32, 2, 3];
        let dt = 1.0 / 30.0;
        let streams: Vec<Vec<StreamUpdate>> = cams
            .iter()
            .map(|&c| {
                (0..frames)
                    .map(|f| StreamUpdate { camera_id: c, frame_index: f, t: f as f64 * dt, tracks: Vec::new(), arrival_seq: 0 })
                    .collect()
            })
            .collect();

        let drain = |order: &mut dyn Iterator<Item = usize>| {
            let mut b = SyncBarrier::new(BarrierConfig::strict(cams, dt)).unwrap();
            let mut next = [0usize; 3];
            let mut out = Vec::new();
            let tail = (0..3).flat_map(|i| std::iter::repeat_n(i, frames as usize));
            for i in order.chain(tail) {
                if next[i] == streams[i].len() {
                    continue;
                }
                b.ingest(streams[i][next[i]].clone()).unwrap();
                next[i] += 1;
                while let Some(s) = b.try_release() {
                    out.push(s);
                }
            }
            out.extend(b.flush());
            out
        };
        let reference = drain(&mut (0..3).cycle().take(3 * frames as usize));
        let shuffled = drain(&mut choices.into_iter());
        prop_assert_eq!(reference.len(), frames as usize);
        prop_assert_eq!(shuffled, reference);
    }

    #[test]
    fn metrics_ignore_identity_labels(mult in 1u64..1000, add in 0u64..1_000_000) {
        let (truth, states) = run();
        let renamed = relabel(states, |g| g * (2 * mult + 1) + add);
        let (a, b) = (compute_hosr(truth, states), compute_hosr(truth, &renamed));
        prop_assert_eq!((a.total, a.successful, a.censored), (b.total, b.successful, b.censored));
        prop_assert_eq!(compute_idf1(truth, states), compute_idf1(truth, &renamed));
        prop_assert_eq!(count_id_switches(truth, states), count_id_switches(truth, &renamed));
    }

    #[test]
    fn perfect_identities_score_one_on_any_frame_subset(modulus in 2u64..50, phase in 0u64..50) {
        let (truth, states) = run();
        let labels = truth.labels();
        let perfect: Vec<TrackState> = states
            .iter()
            .filter(|s| s.frame_index % modulus != phase % modulus)
            .cloned()
            .map(|mut s| {
                s.global_id = Some(GlobalId(labels[&s.key()] + 100));
                s
            })
            .collect();
        let r = compute_idf1(truth, &perfect);
        prop_assert_eq!(r.idf1, Some(1.0));
        prop_assert_eq!(r.idtp, r.gt_count);
    }

    #[test]
    fn idf1_is_bounded_under_corruption(stride in 1usize..40) {
        let (truth, states) = run();
        let mut bad = states.clone();
        for s in bad.iter_mut().step_by(stride) {
            s.global_id = Some(GlobalId(s.global_id.map_or(0, |g| g.0 + 1_000_000)));
        }
        let r = compute_idf1(truth, &bad);
        let v = r.idf1.unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!(r.idtp <= r.gt_count.min(r.pred_count));
    }
}
