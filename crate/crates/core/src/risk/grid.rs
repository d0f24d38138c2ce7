use std::collections::BTreeMap;

use crate::distancing::{FramePositions, ZoneLabel};
use crate::geometry::GroundPoint;
use crate::tracking::TrackId;

use super::{for_each_kernel_cell, Field};

/// Maps ground-plane coordinates onto grid cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    /// Ground-plane pixels per cell.
    pub cell_scale: f64,
    /// Ground coordinate of the corner of cell (0, 0).
    pub origin: (f64, f64),
}

impl GridSpec {
    pub fn new(width: usize, height: usize) -> Self {
        GridSpec {
            width,
            height,
            cell_scale: 1.0,
            origin: (0.0, 0.0),
        }
    }

    /// Cell coordinates of a ground point; may lie outside the grid.
    pub fn cell_of(&self, p: &GroundPoint) -> (i64, i64) {
        (
            ((p.xw - self.origin.0) / self.cell_scale).floor() as i64,
            ((p.yw - self.origin.1) / self.cell_scale).floor() as i64,
        )
    }
}

/// Accumulating grid of kernel stamps.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskGrid {
    spec: GridSpec,
    field: Field,
    dropped: u64,
}

impl RiskGrid {
    pub fn new(spec: GridSpec) -> Self {
        RiskGrid {
            field: Field::zeros(spec.width, spec.height),
            spec,
            dropped: 0,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Stamps whose center fell outside the grid.
    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    /// Adds one kernel centered on cell `(cx, cy)`, clipped at the borders.
    /// Out-of-bounds centers are counted and ignored.
    pub fn stamp_kernel(&mut self, cx: i64, cy: i64) -> bool {
        let data = self.field.values_mut();
        let inside =
            for_each_kernel_cell(self.spec.width, self.spec.height, cx, cy, |i, w| data[i] += w);
        if !inside {
            self.dropped += 1;
        }
        inside
    }

    pub fn stamp_point(&mut self, p: &GroundPoint) -> bool {
        let (cx, cy) = self.spec.cell_of(p);
        self.stamp_kernel(cx, cy)
    }

    /// Adds one stamp per person on the frame.
    pub fn accumulate_tracking(&mut self, pos: &FramePositions) {
        for (_, p) in pos.entries() {
            self.stamp_point(p);
        }
    }
}

/// Red, tracked and yellow layers with their risk coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationGrid {
    pub red: RiskGrid,
    pub tracked: RiskGrid,
    pub yellow: RiskGrid,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
}

impl ViolationGrid {
    pub fn new(spec: GridSpec, alpha: f64, beta: f64, delta: f64) -> Self {
        ViolationGrid {
            red: RiskGrid::new(spec),
            tracked: RiskGrid::new(spec),
            yellow: RiskGrid::new(spec),
            alpha,
            beta,
            delta,
        }
    }

    /// Every tracked person stamps the tracked layer; red and yellow people
    /// also stamp their own layer.
    pub fn accumulate_violations(
        &mut self,
        labels: &BTreeMap<TrackId, ZoneLabel>,
        pos: &FramePositions,
    ) {
        for (id, p) in pos.entries() {
            self.tracked.stamp_point(p);
            match labels.get(id) {
                Some(ZoneLabel::HighRisk) => {
                    self.red.stamp_point(p);
                }
                Some(ZoneLabel::PotentiallyRisky) => {
                    self.yellow.stamp_point(p);
                }
                _ => {}
            }
        }
    }

    /// `alpha * R + beta * T + delta * Y`.
    pub fn combined(&self) -> Field {
        let (a, b, d) = (self.alpha, self.beta, self.delta);
        let data = self
            .red
            .field()
            .values()
            .iter()
            .zip(self.tracked.field().values())
            .zip(self.yellow.field().values())
            .map(|((&r, &t), &y)| r * a + t * b + y * d)
            .collect();
        Field::from_vec(self.red.spec().width, self.red.spec().height, data)
            .expect("layers share one spec")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> RiskGrid {
        RiskGrid::new(GridSpec::new(10, 10))
    }

    #[test]
    fn single_stamp_shape() {
        let mut g = grid();
        g.stamp_kernel(5, 5);
        let f = g.field();
        assert_eq!(f.get(5, 5), 2.0);
        for (x, y) in [(4, 5), (6, 5), (5, 4), (5, 6)] {
            assert_eq!(f.get(x, y), 1.0);
        }
        for (x, y) in [(4, 4), (6, 6), (4, 6), (6, 4)] {
            assert_eq!(f.get(x, y), 0.0);
        }
        g.stamp_kernel(5, 5);
        assert_eq!(g.field().get(5, 5), 4.0);
        assert_eq!(g.field().get(4, 5), 2.0);
    }

    #[test]
    fn corner_stamp_mass() {
        let mut g = grid();
        g.stamp_kernel(0, 0);
        assert_eq!(g.field().sum(), 4.0);
    }

    #[test]
    fn outside_stamps_are_counted() {
        let mut g = grid();
        assert!(!g.stamp_point(&GroundPoint::new(-0.5, 3.0)));
        assert!(!g.stamp_point(&GroundPoint::new(3.0, 10.0)));
        assert_eq!(g.dropped(), 2);
        assert_eq!(g.field().sum(), 0.0);
    }

    #[test]
    fn cell_scale_and_origin() {
        let spec = GridSpec {
            width: 4,
            height: 4,
            cell_scale: 10.0,
            origin: (-20.0, 0.0),
        };
        assert_eq!(spec.cell_of(&GroundPoint::new(-20.0, 0.0)), (0, 0));
        assert_eq!(spec.cell_of(&GroundPoint::new(5.0, 39.9)), (2, 3));
        assert_eq!(spec.cell_of(&GroundPoint::new(-20.1, 0.0)).0, -1);
    }

    #[test]
    fn combined_field_weights_layers() {
        let spec = GridSpec::new(10, 10);
        let pos = FramePositions::new(
            1,
            vec![
                (TrackId(1), GroundPoint::new(2.5, 2.5)),
                (TrackId(2), GroundPoint::new(7.5, 7.5)),
            ],
        )
        .unwrap();
        let labels: BTreeMap<_, _> = [(TrackId(1), ZoneLabel::HighRisk), (TrackId(2), ZoneLabel::Safe)].into();

        let mut vg = ViolationGrid::new(spec, 1.0, 0.0, 0.0);
        vg.accumulate_violations(&labels, &pos);
        let mut one = RiskGrid::new(spec);
        one.stamp_kernel(2, 2);
        assert_eq!(&vg.combined(), one.field());

        let green: BTreeMap<_, _> = [(TrackId(1), ZoneLabel::Safe), (TrackId(2), ZoneLabel::Safe)].into();
        let mut vg = ViolationGrid::new(spec, 1.0, 0.1, 0.5);
        vg.accumulate_violations(&green, &pos);
        assert_eq!(vg.red.field().sum(), 0.0);
        assert_eq!(vg.yellow.field().sum(), 0.0);
        assert_eq!(vg.tracked.field().sum(), 12.0);
    }
}
