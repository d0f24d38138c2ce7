use crate::distancing::FramePositions;

use super::{for_each_kernel_cell, Field, GridSpec};

/// Grid whose every cell is multiplied by `rate` once per frame.
///
/// Values are held as `stored * scale`, so a decay step only touches
/// `scale`; the cells are rewritten when `scale` nears underflow.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayingField {
    width: usize,
    height: usize,
    stored: Vec<f64>,
    scale: f64,
    rate: f64,
}

const RESCALE_BELOW: f64 = 1e-200;

impl DecayingField {
    pub fn new(width: usize, height: usize, rate: f64) -> Self {
        DecayingField {
            width,
            height,
            stored: vec![0.0; width * height],
            scale: 1.0,
            rate,
        }
    }

    pub fn decay(&mut self) {
        self.scale *= self.rate;
        if self.scale < RESCALE_BELOW {
            let s = self.scale;
            self.stored.iter_mut().for_each(|v| *v *= s);
            self.scale = 1.0;
        }
    }

    /// Adds a kernel stamp; false when the center is outside.
    pub fn stamp(&mut self, cx: i64, cy: i64) -> bool {
        let inv = 1.0 / self.scale;
        let stored = &mut self.stored;
        for_each_kernel_cell(self.width, self.height, cx, cy, |i, w| stored[i] += w * inv)
    }

    pub fn value(&self, x: usize, y: usize) -> f64 {
        self.stored[y * self.width + x] * self.scale
    }

    pub fn to_field(&self) -> Field {
        let data = self.stored.iter().map(|v| v * self.scale).collect();
        Field::from_vec(self.width, self.height, data).expect("sized at construction")
    }
}

/// Crowd map with multiplicative per-frame decay `gamma`, plus an optional
/// long-term exponential moving average of the single-frame maps:
/// `L_t = a * L_{t-1} + (1 - a) * C_t`.
///
/// With `C_t = gamma * C_{t-1} + K_t` and a second accumulator
/// `Q_t = a * Q_{t-1} + K_t` fed the same stamps, the average has the
/// closed form `L_t = (1 - a) / (gamma - a) * (gamma * C_t - a * Q_t)`, so
/// neither map needs a full pass per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct CrowdGrid {
    spec: GridSpec,
    gamma: f64,
    current: DecayingField,
    long_term: Option<LongTerm>,
    dropped: u64,
}

#[derive(Debug, Clone, PartialEq)]
enum LongTerm {
    ClosedForm { smoothing: f64, shadow: DecayingField },
    /// `gamma == smoothing`; the closed form is singular, update eagerly.
    Eager { smoothing: f64, average: Vec<f64> },
}

impl CrowdGrid {
    /// `gamma` in `(0, 1]`; `long_term_smoothing` in `[0, 1)` enables the
    /// long-term map.
    pub fn new(spec: GridSpec, gamma: f64, long_term_smoothing: Option<f64>) -> Self {
        let long_term = long_term_smoothing.map(|a| {
            if (gamma - a).abs() < 1e-9 {
                LongTerm::Eager {
                    smoothing: a,
                    average: vec![0.0; spec.width * spec.height],
                }
            } else {
                LongTerm::ClosedForm {
                    smoothing: a,
                    shadow: DecayingField::new(spec.width, spec.height, a),
                }
            }
        });
        CrowdGrid {
            current: DecayingField::new(spec.width, spec.height, gamma),
            spec,
            gamma,
            long_term,
            dropped: 0,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    /// Decays every cell, then stamps the frame's people.
    pub fn crowd_step(&mut self, pos: &FramePositions) {
        self.current.decay();
        if let Some(LongTerm::ClosedForm { shadow, .. }) = &mut self.long_term {
            shadow.decay();
        }
        for (_, p) in pos.entries() {
            let (cx, cy) = self.spec.cell_of(p);
            if !self.current.stamp(cx, cy) {
                self.dropped += 1;
                continue;
            }
            if let Some(LongTerm::ClosedForm { shadow, .. }) = &mut self.long_term {
                shadow.stamp(cx, cy);
            }
        }
        if let Some(LongTerm::Eager { smoothing, average }) = &mut self.long_term {
            let a = *smoothing;
            for (i, avg) in average.iter_mut().enumerate() {
                *avg = a * *avg + (1.0 - a) * self.current.stored[i] * self.current.scale;
            }
        }
    }

    pub fn value(&self, x: usize, y: usize) -> f64 {
        self.current.value(x, y)
    }

    /// Current single-frame crowd map.
    pub fn field(&self) -> Field {
        self.current.to_field()
    }

    /// Long-term average map, if enabled.
    pub fn long_term_field(&self) -> Option<Field> {
        let (w, h) = (self.spec.width, self.spec.height);
        match self.long_term.as_ref()? {
            LongTerm::Eager { average, .. } => Some(Field::from_vec(w, h, average.clone()).unwrap()),
            LongTerm::ClosedForm { smoothing, shadow } => {
                let (g, a) = (self.gamma, *smoothing);
                let k = (1.0 - a) / (g - a);
                let data = self
                    .current
                    .stored
                    .iter()
                    .zip(&shadow.stored)
                    .map(|(&c, &q)| {
                        let v = k * (g * c * self.current.scale - a * q * shadow.scale);
                        v.max(0.0)
                    })
                    .collect();
                Some(Field::from_vec(w, h, data).unwrap())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GroundPoint;
    use crate::tracking::TrackId;

    fn one_person(frame: u64, x: f64, y: f64) -> FramePositions {
        FramePositions::new(frame, vec![(TrackId(1), GroundPoint::new(x, y))]).unwrap()
    }

    #[test]
    fn empty_stays_zero() {
        let mut c = CrowdGrid::new(GridSpec::new(8, 8), 0.99, None);
        for f in 1..=50 {
            c.crowd_step(&FramePositions::new(f, vec![]).unwrap());
        }
        assert_eq!(c.field().sum(), 0.0);
    }

    #[test]
    fn steady_person_reaches_geometric_limit() {
        let mut c = CrowdGrid::new(GridSpec::new(8, 8), 0.99, None);
        for f in 1..=2000 {
            c.crowd_step(&one_person(f, 4.5, 4.5));
        }
        let limit = 2.0 / (1.0 - 0.99);
        assert!((c.value(4, 4) - limit).abs() / limit < 0.01);
    }

    #[test]
    fn pure_decay_after_leaving() {
        let mut c = CrowdGrid::new(GridSpec::new(8, 8), 0.99, None);
        for f in 1..=100 {
            c.crowd_step(&one_person(f, 4.5, 4.5));
        }
        let at_leave = c.value(4, 4);
        for f in 101..=150 {
            c.crowd_step(&FramePositions::new(f, vec![]).unwrap());
        }
        let want = at_leave * 0.99f64.powi(50);
        assert!((c.value(4, 4) - want).abs() < 1e-9 * want);
    }

    #[test]
    fn rescaling_keeps_values() {
        let mut f = DecayingField::new(3, 3, 0.5);
        f.stamp(1, 1);
        for _ in 0..700 {
            f.decay();
            f.stamp(1, 1);
        }
        // Fixed point of v = 0.5 v + 2.
        assert!((f.value(1, 1) - 4.0).abs() < 1e-12);
    }

    /// Explicit per-cell recursion for both maps.
    fn eager_reference(gamma: f64, a: f64, frames: &[FramePositions], spec: GridSpec) -> (Vec<f64>, Vec<f64>) {
        let n = spec.width * spec.height;
        let (mut c, mut l) = (vec![0.0; n], vec![0.0; n]);
        for pos in frames {
            c.iter_mut().for_each(|v| *v *= gamma);
            for (_, p) in pos.entries() {
                let (cx, cy) = spec.cell_of(p);
                for_each_kernel_cell(spec.width, spec.height, cx, cy, |i, w| c[i] += w);
            }
            for i in 0..n {
                l[i] = a * l[i] + (1.0 - a) * c[i];
            }
        }
        (c, l)
    }

    #[test]
    fn long_term_closed_form_matches_recursion() {
        let spec = GridSpec::new(6, 5);
        let frames: Vec<_> = (1..=400u64)
            .map(|f| {
                let x = 0.5 + (f % 6) as f64;
                let y = 0.5 + ((f / 7) % 5) as f64;
                one_person(f, x, y)
            })
            .collect();
        for (gamma, a) in [(0.99, 0.999), (0.9, 0.5), (0.95, 0.95)] {
            let mut grid = CrowdGrid::new(spec, gamma, Some(a));
            frames.iter().for_each(|p| grid.crowd_step(p));
            let (c, l) = eager_reference(gamma, a, &frames, spec);
            let lt = grid.long_term_field().unwrap();
            for i in 0..c.len() {
                assert!((grid.field().values()[i] - c[i]).abs() < 1e-9 * (1.0 + c[i]));
                assert!((lt.values()[i] - l[i]).abs() < 1e-9 * (1.0 + l[i]), "{gamma} {a}");
            }
        }
    }
}
