use std::collections::{BTreeMap, BTreeSet};

use crate::tracking::TrackId;

use super::{pairs_within, DistancePolicy, FramePositions};

/// Proximity history of one pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PairState {
    /// Consecutive frames the pair has been within the couple distance.
    pub frames: u64,
    pub couple: bool,
}

/// A couple active on the current frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Couple {
    pub a: TrackId,
    pub b: TrackId,
    /// Current distance between the partners, meters.
    pub distance_m: f64,
}

/// Per-pair consecutive-proximity counters. Keys are `(a, b)` with `a < b`;
/// pairs absent from the map have a zero counter.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoupleRegistry {
    pairs: BTreeMap<(TrackId, TrackId), PairState>,
}

impl CoupleRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&self, a: TrackId, b: TrackId) -> PairState {
        self.pairs
            .get(&(a.min(b), a.max(b)))
            .copied()
            .unwrap_or_default()
    }

    pub fn tracked_pairs(&self) -> impl Iterator<Item = (&(TrackId, TrackId), &PairState)> {
        self.pairs.iter()
    }

    /// Advances every counter by one frame: pairs within the couple distance
    /// increment, all others reset to zero.
    pub fn update(&mut self, pos: &FramePositions, policy: &DistancePolicy) {
        let close = pairs_within(pos, policy.couple_radius_px());
        let threshold = policy.couple_frames();
        let previous = std::mem::take(&mut self.pairs);
        for key in close {
            let frames = previous.get(&key).map_or(0, |s| s.frames) + 1;
            self.pairs.insert(
                key,
                PairState {
                    frames,
                    couple: frames as f64 > threshold,
                },
            );
        }
    }

    /// Couples on this frame. A person belongs to at most one couple: flagged
    /// pairs are taken closest first, ties broken by the lower id sum.
    pub fn active_couples(&self, pos: &FramePositions, policy: &DistancePolicy) -> Vec<Couple> {
        let mut candidates: Vec<(f64, TrackId, TrackId)> = self
            .pairs
            .iter()
            .filter(|(_, s)| s.couple)
            .filter_map(|(&(a, b), _)| {
                let (pa, pb) = (pos.get(a)?, pos.get(b)?);
                Some((pa.distance(&pb), a, b))
            })
            .collect();
        candidates.sort_by(|x, y| {
            x.0.total_cmp(&y.0)
                .then((x.1 .0 + x.2 .0).cmp(&(y.1 .0 + y.2 .0)))
                .then((x.1, x.2).cmp(&(y.1, y.2)))
        });
        let mut taken = BTreeSet::new();
        let mut out = Vec::new();
        for (d, a, b) in candidates {
            if taken.contains(&a) || taken.contains(&b) {
                continue;
            }
            taken.insert(a);
            taken.insert(b);
            out.push(Couple {
                a,
                b,
                distance_m: d / policy.xi,
            });
        }
        out.sort_by_key(|c| (c.a, c.b));
        out
    }
}

/// Convenience wrapper: returns the registry advanced by one frame.
pub fn update_couples(
    mut registry: CoupleRegistry,
    pos: &FramePositions,
    policy: &DistancePolicy,
) -> CoupleRegistry {
    registry.update(pos, policy);
    registry
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GroundPoint;

    fn policy() -> DistancePolicy {
        DistancePolicy {
            xi: 10.0,
            r: 20.0,
            couple_d: 1.0,
            couple_eps: 5.0,
            fps: 25.0,
        }
    }

    fn pair_frame(frame: u64, sep_m: f64, p: &DistancePolicy) -> FramePositions {
        FramePositions::new(
            frame,
            vec![
                (TrackId(1), GroundPoint::new(100.0, 100.0)),
                (TrackId(2), GroundPoint::new(100.0 + sep_m * p.xi, 100.0)),
            ],
        )
        .unwrap()
    }

    fn run(frames: u64, sep_m: f64) -> CoupleRegistry {
        let p = policy();
        (1..=frames).fold(CoupleRegistry::new(), |reg, f| {
            update_couples(reg, &pair_frame(f, sep_m, &p), &p)
        })
    }

    #[test]
    fn couple_after_more_than_eps_seconds() {
        let reg = run(150, 0.5);
        assert!(reg.state(TrackId(1), TrackId(2)).couple);
        assert_eq!(reg.state(TrackId(2), TrackId(1)).frames, 150);
        assert!(!run(100, 0.5).state(TrackId(1), TrackId(2)).couple);
        assert!(!run(125, 0.5).state(TrackId(1), TrackId(2)).couple);
        assert!(run(126, 0.5).state(TrackId(1), TrackId(2)).couple);
        assert_eq!(run(150, 1.5).state(TrackId(1), TrackId(2)).frames, 0);
    }

    #[test]
    fn counter_resets_on_separation_or_absence() {
        let p = policy();
        let mut reg = run(200, 0.5);
        reg.update(&pair_frame(201, 3.0, &p), &p);
        assert_eq!(reg.state(TrackId(1), TrackId(2)), PairState::default());

        let mut reg = run(200, 0.5);
        let alone = FramePositions::new(201, vec![(TrackId(1), GroundPoint::new(0.0, 0.0))]).unwrap();
        reg.update(&alone, &p);
        assert_eq!(reg.state(TrackId(1), TrackId(2)).frames, 0);
    }

    #[test]
    fn third_person_joins_no_triple() {
        let p = policy();
        let mut reg = CoupleRegistry::new();
        let pts = [(1, 0.0), (2, 6.0), (3, 11.0)];
        for f in 1..=130 {
            let pos = FramePositions::new(
                f,
                pts.iter()
                    .map(|&(id, x)| (TrackId(id), GroundPoint::new(x, 0.0)))
                    .collect(),
            )
            .unwrap();
            reg.update(&pos, &p);
        }
        let pos = FramePositions::new(
            131,
            pts.iter()
                .map(|&(id, x)| (TrackId(id), GroundPoint::new(x, 0.0)))
                .collect(),
        )
        .unwrap();
        // Pairs (2,3) at 5 px and (1,2) at 6 px both qualify; 1-3 is 11 px apart.
        let couples = reg.active_couples(&pos, &p);
        assert_eq!(couples.len(), 1);
        assert_eq!((couples[0].a, couples[0].b), (TrackId(2), TrackId(3)));
        assert!((couples[0].distance_m - 0.5).abs() < 1e-12);
    }
}
