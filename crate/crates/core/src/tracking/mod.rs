//! SORT-style multi-object tracking.

mod assignment;
mod kalman;
mod tracker;

pub use assignment::{solve_assignment, Assignment, CostMatrix};
pub use kalman::{observe, KalmanConfig, KalmanFilter, StateCovariance, StateVector, TrackState};
pub use tracker::{StepOutput, Track, TrackId, TrackSnapshot, TrackStatus, Tracker, TrackerConfig};

use crate::geometry::{iou, BBox};

/// Associates predicted track boxes with detections on `1 - IoU` cost.
/// Solver pairs whose IoU falls below `iou_gate` are split back into the
/// unmatched sets.
pub fn associate(tracks: &[BBox], detections: &[BBox], iou_gate: f64) -> Assignment {
    let overlaps = CostMatrix::from_fn(tracks.len(), detections.len(), |i, j| {
        iou(&tracks[i], &detections[j])
    });
    associate_overlaps(&overlaps, iou_gate)
}

/// [`associate`] on a precomputed IoU matrix.
pub fn associate_overlaps(overlaps: &CostMatrix, iou_gate: f64) -> Assignment {
    let cost = CostMatrix::from_fn(overlaps.rows(), overlaps.cols(), |i, j| {
        1.0 - overlaps.get(i, j)
    });
    // IoU values are finite by construction.
    let solved = solve_assignment(&cost).expect("IoU costs are finite");

    let mut out = Assignment {
        matches: Vec::with_capacity(solved.matches.len()),
        unmatched_tracks: solved.unmatched_tracks,
        unmatched_detections: solved.unmatched_detections,
    };
    for (i, j) in solved.matches {
        if overlaps.get(i, j) < iou_gate {
            out.unmatched_tracks.push(i);
            out.unmatched_detections.push(j);
        } else {
            out.matches.push((i, j));
        }
    }
    out.unmatched_tracks.sort_unstable();
    out.unmatched_detections.sort_unstable();
    out
}
