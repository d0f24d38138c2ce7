//! Streaming social-distancing analytics.
//!
//! The engine consumes per-frame person detections and runs them through a
//! fixed chain of stages:
//!
//! 1. [`tracking`]: SORT-style multi-object tracking (constant-velocity Kalman
//!    filter on a box state, Hungarian association over IoU cost).
//! 2. [`geometry`]: box metrics and the pixel to bird's-eye-view ground
//!    plane projection.
//! 3. [`distancing`]: pairwise violation detection, couple detection and
//!    per-person zone labels.
//! 4. [`risk`]: accumulated tracking/violation grids, a decaying crowd map,
//!    normalization and raster export.
//!
//! [`io`] ties the stages together: detection ingest, configuration and the
//! per-frame [`io::pipeline`].

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distancing;
pub mod error;
pub mod geometry;
pub mod io;
pub mod risk;
pub mod synthetic;
pub mod tracking;

pub use distancing::{
    classify_zones, frame_stats, pairwise_violations, violation, CoupleRegistry, DistancePolicy,
    FramePositions, ZoneCounts, ZoneLabel,
};
pub use error::{Error, Result};
pub use geometry::{
    build_projection, ciou_loss, estimate_homography, foot_point, iou, project_to_bev, BBox,
    CIoUBreakdown, CameraModel, GroundPoint, Homography, PixelPoint,
};
pub use risk::{CrowdGrid, RiskGrid, ViolationGrid};
pub use tracking::{
    associate, solve_assignment, Assignment, Track, TrackId, TrackState, TrackStatus, Tracker,
    TrackerConfig,
};
