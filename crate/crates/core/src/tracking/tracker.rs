use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{foot_point, project_to_bev, BBox, GroundPoint, Homography};

use super::associate;
use super::kalman::{KalmanConfig, KalmanFilter, TrackState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrackId(pub u64);

impl fmt::Display for TrackId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackStatus {
    Tentative,
    Confirmed,
    Dead,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerConfig {
    pub iou_gate: f64,
    pub min_hits: u32,
    pub max_age: u32,
    pub kalman: KalmanConfig,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            iou_gate: 0.3,
            min_hits: 3,
            max_age: 30,
            kalman: KalmanConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Track {
    pub id: TrackId,
    pub state: TrackState,
    /// Matched updates, the birth detection included.
    pub hits: u32,
    /// Frames since birth.
    pub age: u32,
    pub time_since_update: u32,
    pub status: TrackStatus,
    /// Ground positions on every matched frame.
    pub trajectory: Vec<(u64, GroundPoint)>,
    /// Confidence of the last matched detection.
    pub conf: f64,
}

/// A confirmed track as seen on one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackSnapshot {
    pub id: TrackId,
    pub frame: u64,
    pub bbox: BBox,
    pub ground: GroundPoint,
    pub hits: u32,
    pub age: u32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepOutput {
    /// Confirmed tracks matched on this frame, by ascending id.
    pub confirmed: Vec<TrackSnapshot>,
    pub new_ids: Vec<TrackId>,
    pub dead_ids: Vec<TrackId>,
}

/// Single-stream tracker. Frames must be fed in strictly increasing order.
#[derive(Debug, Clone)]
pub struct Tracker {
    config: TrackerConfig,
    filter: KalmanFilter,
    ground: Homography,
    tracks: Vec<Track>,
    next_id: u64,
    last_frame: Option<u64>,
}

impl Tracker {
    /// `ground` maps image pixels to the bird's-eye-view plane.
    pub fn new(config: TrackerConfig, ground: Homography) -> Self {
        Tracker {
            filter: KalmanFilter::new(config.kalman),
            config,
            ground,
            tracks: Vec::new(),
            next_id: 1,
            last_frame: None,
        }
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    /// Live tracks in creation order.
    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    /// Number of ids issued so far.
    pub fn issued_ids(&self) -> u64 {
        self.next_id - 1
    }

    pub fn step(&mut self, detections: &[BBox], frame: u64) -> Result<StepOutput> {
        if let Some(previous) = self.last_frame {
            if frame <= previous {
                return Err(Error::FrameOrder { previous, got: frame });
            }
        }
        self.last_frame = Some(frame);
        let mut out = StepOutput::default();

        let mut predicted = Vec::with_capacity(self.tracks.len());
        for track in &mut self.tracks {
            track.age += 1;
            track.time_since_update += 1;
            match self
                .filter
                .predict(&track.state)
                .and_then(|s| s.to_bbox(track.conf).map(|b| (s, b)))
            {
                Ok((state, bbox)) => {
                    track.state = state;
                    predicted.push(Some(bbox));
                }
                Err(Error::DegeneratePrediction) => {
                    track.status = TrackStatus::Dead;
                    predicted.push(None);
                }
                Err(e) => return Err(e),
            }
        }

        let (live, live_boxes): (Vec<usize>, Vec<BBox>) = predicted
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.map(|b| (i, b)))
            .unzip();
        let assignment = associate(&live_boxes, detections, self.config.iou_gate);

        for &(t, d) in &assignment.matches {
            let track = &mut self.tracks[live[t]];
            track.state = self.filter.update(&track.state, &detections[d])?;
            track.hits += 1;
            track.time_since_update = 0;
            track.conf = detections[d].conf;
        }

        for &d in &assignment.unmatched_detections {
            let id = TrackId(self.next_id);
            self.next_id += 1;
            self.tracks.push(Track {
                id,
                state: self.filter.initiate(&detections[d]),
                hits: 1,
                age: 0,
                time_since_update: 0,
                status: TrackStatus::Tentative,
                trajectory: Vec::new(),
                conf: detections[d].conf,
            });
            out.new_ids.push(id);
        }

        let max_age = self.config.max_age;
        let min_hits = self.config.min_hits;
        for track in &mut self.tracks {
            if track.time_since_update > max_age {
                track.status = TrackStatus::Dead;
            }
            if track.status == TrackStatus::Tentative && track.hits >= min_hits {
                track.status = TrackStatus::Confirmed;
            }
        }
        self.tracks.retain(|t| {
            if t.status == TrackStatus::Dead {
                out.dead_ids.push(t.id);
                false
            } else {
                true
            }
        });

        for track in &mut self.tracks {
            if track.time_since_update != 0 {
                continue;
            }
            let bbox = track.state.to_bbox(track.conf)?;
            let ground = project_to_bev(&self.ground, foot_point(&bbox))?;
            track.trajectory.push((frame, ground));
            if track.status == TrackStatus::Confirmed {
                out.confirmed.push(TrackSnapshot {
                    id: track.id,
                    frame,
                    bbox,
                    ground,
                    hits: track.hits,
                    age: track.age,
                });
            }
        }
        Ok(out)
    }
}
