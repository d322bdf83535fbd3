//! Topology-aware spatiotemporal handover for multi-camera vehicle tracking.
//!
//! Fragmented per-camera tracklets are stitched into global trajectories by
//! the [`engine`], fed with temporally aligned snapshots from the [`sync`]
//! barrier. The [`sim`] module generates seeded traffic and per-camera
//! observations with known ground truth, and [`metrics`] scores the result.

// Negated float comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod engine;
pub mod geometry;
pub mod io;
pub mod kinematics;
pub mod metrics;
pub mod pipeline;
pub mod sim;
pub mod sync;
pub mod track;
