use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::tracking::TrackId;

use super::{CoupleRegistry, DistancePolicy, FramePositions};

/// Per-person safety classification on one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ZoneLabel {
    /// Green: keeps the safe distance.
    Safe,
    /// Red: within the safe distance of someone outside their couple.
    HighRisk,
    /// Yellow: member of a couple with no outside breach.
    PotentiallyRisky,
}

/// Label counts for one frame. `total = red + 2 * yellow_pairs + green`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ZoneCounts {
    pub total: usize,
    pub red: usize,
    pub yellow_pairs: usize,
    pub green: usize,
}

/// Assigns every tracked person exactly one label.
///
/// Without a registry every person in a violating pair is red. With one,
/// active couples ignore their mutual proximity and turn yellow unless the
/// couple is breached: someone else violates either partner, or stands
/// within `(2 + d_c / 2)` meters of the couple's midpoint. A breach turns
/// both partners and every intruder red.
pub fn classify_zones(
    pos: &FramePositions,
    violations: &BTreeSet<(TrackId, TrackId)>,
    registry: Option<&CoupleRegistry>,
    policy: &DistancePolicy,
) -> Result<BTreeMap<TrackId, ZoneLabel>> {
    for &(a, b) in violations {
        for id in [a, b] {
            if pos.get(id).is_none() {
                return Err(Error::ZoneConsistency { id: id.0 });
            }
        }
    }

    let couples = registry.map_or_else(Vec::new, |r| r.active_couples(pos, policy));
    let mut partner = BTreeMap::new();
    for c in &couples {
        partner.insert(c.a, c.b);
        partner.insert(c.b, c.a);
    }

    let mut labels: BTreeMap<TrackId, ZoneLabel> = pos
        .entries()
        .iter()
        .map(|&(id, _)| (id, ZoneLabel::Safe))
        .collect();

    for &(a, b) in violations {
        if partner.get(&a) != Some(&b) {
            labels.insert(a, ZoneLabel::HighRisk);
            labels.insert(b, ZoneLabel::HighRisk);
        }
    }

    for c in &couples {
        let (pa, pb) = (pos.get(c.a).unwrap(), pos.get(c.b).unwrap());
        let center = pa.midpoint(&pb);
        let radius = (2.0 + c.distance_m / 2.0) * policy.xi;
        let intruders: Vec<TrackId> = pos
            .entries()
            .iter()
            .filter(|&&(id, p)| {
                id != c.a
                    && id != c.b
                    && (p.distance(&center) <= radius
                        || violations.contains(&(id.min(c.a), id.max(c.a)))
                        || violations.contains(&(id.min(c.b), id.max(c.b))))
            })
            .map(|e| e.0)
            .collect();
        if intruders.is_empty() {
            labels.insert(c.a, ZoneLabel::PotentiallyRisky);
            labels.insert(c.b, ZoneLabel::PotentiallyRisky);
        } else {
            for id in intruders.into_iter().chain([c.a, c.b]) {
                labels.insert(id, ZoneLabel::HighRisk);
            }
        }
    }
    Ok(labels)
}

pub fn frame_stats(labels: &BTreeMap<TrackId, ZoneLabel>) -> ZoneCounts {
    let mut counts = ZoneCounts {
        total: labels.len(),
        ..ZoneCounts::default()
    };
    let mut yellow = 0;
    for label in labels.values() {
        match label {
            ZoneLabel::Safe => counts.green += 1,
            ZoneLabel::HighRisk => counts.red += 1,
            ZoneLabel::PotentiallyRisky => yellow += 1,
        }
    }
    counts.yellow_pairs = yellow / 2;
    counts
}
