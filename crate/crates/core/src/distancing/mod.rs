//! Inter-person distance evaluation on the ground plane.

mod couples;
mod zones;

use std::collections::BTreeSet;

pub use couples::{update_couples, Couple, CoupleRegistry, PairState};
pub use zones::{classify_zones, frame_stats, ZoneCounts, ZoneLabel};

use crate::error::{Error, Result};
use crate::geometry::GroundPoint;
use crate::tracking::TrackId;

/// Distance thresholds. `xi` converts meters to ground-plane pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistancePolicy {
    /// Ground-plane pixels per meter.
    pub xi: f64,
    /// Safe distance in ground-plane pixels.
    pub r: f64,
    /// Couple proximity, meters.
    pub couple_d: f64,
    /// Couple duration, seconds.
    pub couple_eps: f64,
    pub fps: f64,
}

impl DistancePolicy {
    /// Ten ground pixels per 98 cm, a 20 px safe distance, 25 fps.
    pub fn oxford_town_centre() -> Self {
        DistancePolicy {
            xi: 10.0 / 0.98,
            r: 20.0,
            couple_d: 1.0,
            couple_eps: 5.0,
            fps: 25.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (key, value) in [
            ("xi_px_per_m", self.xi),
            ("r_px", self.r),
            ("couple_d_m", self.couple_d),
            ("couple_eps_s", self.couple_eps),
            ("fps", self.fps),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::config(key, format!("must be positive, got {value}")));
            }
        }
        Ok(())
    }

    /// Couple proximity in ground-plane pixels.
    pub fn couple_radius_px(&self) -> f64 {
        self.couple_d * self.xi
    }

    /// Consecutive frames a pair must exceed to count as a couple.
    pub fn couple_frames(&self) -> f64 {
        self.couple_eps * self.fps
    }
}

/// Ground positions of the people tracked on one frame, sorted by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FramePositions {
    pub frame: u64,
    entries: Vec<(TrackId, GroundPoint)>,
}

impl FramePositions {
    pub fn new(frame: u64, mut entries: Vec<(TrackId, GroundPoint)>) -> Result<Self> {
        entries.sort_by_key(|e| e.0);
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DimensionMismatch(format!(
                "track {} appears twice in frame {frame}",
                w[0].0
            )));
        }
        if entries
            .iter()
            .any(|(_, p)| !p.xw.is_finite() || !p.yw.is_finite())
        {
            return Err(Error::DimensionMismatch(format!(
                "non-finite ground point in frame {frame}"
            )));
        }
        Ok(FramePositions { frame, entries })
    }

    pub fn entries(&self) -> &[(TrackId, GroundPoint)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: TrackId) -> Option<GroundPoint> {
        self.entries
            .binary_search_by_key(&id, |e| e.0)
            .ok()
            .map(|i| self.entries[i].1)
    }
}

/// 1 when the two points are at most `r` apart.
pub fn violation(p: &GroundPoint, q: &GroundPoint, r: f64) -> u8 {
    u8::from(p.distance(q) <= r)
}

/// All id pairs `(a, b)`, `a < b`, at most `radius` apart. Sweeps along the
/// x axis so only pairs within `radius` horizontally are measured.
pub(crate) fn pairs_within(pos: &FramePositions, radius: f64) -> BTreeSet<(TrackId, TrackId)> {
    let mut by_x: Vec<&(TrackId, GroundPoint)> = pos.entries.iter().collect();
    by_x.sort_by(|a, b| a.1.xw.total_cmp(&b.1.xw).then(a.0.cmp(&b.0)));
    let mut out = BTreeSet::new();
    for (i, (id_a, pa)) in by_x.iter().map(|e| (e.0, e.1)).enumerate() {
        for (id_b, pb) in by_x[i + 1..].iter().map(|e| (e.0, e.1)) {
            if pb.xw - pa.xw > radius {
                break;
            }
            if violation(&pa, &pb, radius) == 1 {
                out.insert((id_a.min(id_b), id_a.max(id_b)));
            }
        }
    }
    out
}

/// Every unordered pair of people closer than the safe distance.
pub fn pairwise_violations(
    pos: &FramePositions,
    policy: &DistancePolicy,
) -> BTreeSet<(TrackId, TrackId)> {
    pairs_within(pos, policy.r)
}
