//! Seeded synthetic detection streams: walkers, couples walking side by
//! side, and people standing still.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::BBox;
use crate::io::FrameDetections;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneConfig {
    pub seed: u64,
    pub frames: u64,
    /// Image size in pixels.
    pub width: f64,
    pub height: f64,
    /// People in view the scene is replenished towards.
    pub target_people: usize,
    /// Share of spawns that are couples.
    pub couple_share: f64,
    /// Share of spawns that stand still for a while.
    pub stander_share: f64,
    /// Per-detection miss probability.
    pub miss_rate: f64,
    /// Spurious low-confidence detections per frame.
    pub clutter_rate: f64,
    /// Horizontal gap between couple partners, pixels.
    pub couple_gap: f64,
}

impl SceneConfig {
    /// A 300-frame 1920x1080 scene with a dozen people.
    pub fn short(seed: u64) -> Self {
        SceneConfig {
            seed,
            frames: 300,
            width: 1920.0,
            height: 1080.0,
            target_people: 12,
            couple_share: 0.25,
            stander_share: 0.2,
            miss_rate: 0.003,
            clutter_rate: 0.2,
            couple_gap: 30.0,
        }
    }

    /// 7,530 frames with about twenty people in view.
    pub fn town_centre(seed: u64) -> Self {
        SceneConfig {
            frames: 7530,
            target_people: 20,
            ..Self::short(seed)
        }
    }
}

#[derive(Debug, Clone)]
struct Person {
    /// Foot point, pixels.
    x: f64,
    y: f64,
    vx: f64,
    vy: f64,
    w: f64,
    h: f64,
    /// Frames left before a stander starts walking away.
    stand: u32,
}

impl Person {
    fn in_view(&self, cfg: &SceneConfig) -> bool {
        let margin = self.w;
        self.x > -margin && self.x < cfg.width + margin && self.y > self.h && self.y < cfg.height + 1.0
    }
}

struct Scene<'a> {
    cfg: &'a SceneConfig,
    rng: ChaCha8Rng,
    people: Vec<Person>,
}

impl Scene<'_> {
    fn body(&mut self) -> (f64, f64) {
        let h = self.rng.random_range(90.0..130.0);
        (h * self.rng.random_range(0.35..0.45), h)
    }

    fn walking_velocity(&mut self, from_left: bool) -> (f64, f64) {
        let speed = self.rng.random_range(1.0..2.5);
        let vx = if from_left { speed } else { -speed };
        (vx, self.rng.random_range(-0.3..0.3))
    }

    /// Adds a walker, couple or stander. New walkers enter at a side edge
    /// unless `anywhere`.
    fn spawn(&mut self, anywhere: bool) {
        let cfg = self.cfg;
        let roll: f64 = self.rng.random();
        let y = self.rng.random_range(300.0..cfg.height - 20.0);
        let from_left = self.rng.random_bool(0.5);
        let x = if anywhere {
            self.rng.random_range(60.0..cfg.width - 60.0)
        } else if from_left {
            -20.0
        } else {
            cfg.width + 20.0
        };
        if roll < cfg.stander_share {
            let (w, h) = self.body();
            let stand = self.rng.random_range(150..900);
            let x = self.rng.random_range(60.0..cfg.width - 60.0);
            let (vx, vy) = self.walking_velocity(from_left);
            self.people.push(Person { x, y, vx, vy, w, h, stand });
        } else if roll < cfg.stander_share + cfg.couple_share {
            let (vx, vy) = self.walking_velocity(from_left);
            for offset in [0.0, cfg.couple_gap] {
                let (w, h) = self.body();
                self.people.push(Person {
                    x: x + offset,
                    y: y + self.rng.random_range(-3.0..3.0),
                    vx,
                    vy,
                    w,
                    h,
                    stand: 0,
                });
            }
        } else {
            let (vx, vy) = self.walking_velocity(from_left);
            let (w, h) = self.body();
            self.people.push(Person { x, y, vx, vy, w, h, stand: 0 });
        }
    }

    fn frame(&mut self, frame: u64) -> FrameDetections {
        let cfg = self.cfg;
        for p in &mut self.people {
            if p.stand > 0 {
                p.stand -= 1;
            } else {
                p.x += p.vx;
                p.y += p.vy;
            }
        }
        self.people.retain(|p| p.in_view(cfg));
        // Newcomers trickle in while the scene is below its target.
        if self.people.len() < cfg.target_people && self.rng.random_bool(0.05) {
            self.spawn(false);
        }

        let mut boxes = Vec::with_capacity(self.people.len() + 1);
        for p in &self.people {
            if self.rng.random_bool(cfg.miss_rate) {
                continue;
            }
            let jx = self.rng.random_range(-0.5..0.5);
            let jy = self.rng.random_range(-0.5..0.5);
            let conf = self.rng.random_range(0.5..1.0);
            boxes.push(detection(p.x + jx - p.w / 2.0, p.y + jy - p.h, p.w, p.h, conf));
        }
        if self.rng.random_bool(cfg.clutter_rate) {
            let x = self.rng.random_range(0.0..cfg.width - 40.0);
            let y = self.rng.random_range(0.0..cfg.height - 100.0);
            let conf = self.rng.random_range(0.05..0.25);
            boxes.push(detection(x, y, 40.0, 100.0, conf));
        }
        FrameDetections { frame, boxes }
    }
}

/// Box from left/top/size rounded to hundredths, as a det file would
/// carry it.
fn detection(left: f64, top: f64, w: f64, h: f64, conf: f64) -> BBox {
    let r = |v: f64| (v * 100.0).round() / 100.0;
    BBox::from_ltwh(r(left), r(top), r(w), r(h), r(conf)).expect("generated boxes are valid")
}

/// Generates `cfg.frames` frames, numbered from 1.
pub fn generate_scene(cfg: &SceneConfig) -> Vec<FrameDetections> {
    let mut scene = Scene {
        cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        people: Vec::new(),
    };
    while scene.people.len() < cfg.target_people {
        scene.spawn(true);
    }
    (1..=cfg.frames).map(|f| scene.frame(f)).collect()
}

/// Two people walking in opposite directions on separate lanes. The first
/// walker is not detected on frames in `hidden`.
pub fn two_walkers(frames: u64, hidden: std::ops::Range<u64>) -> Vec<FrameDetections> {
    (1..=frames)
        .map(|f| {
            let t = f as f64;
            let mut boxes = Vec::with_capacity(2);
            if !hidden.contains(&f) {
                boxes.push(BBox::new(200.0 + 3.0 * t, 400.0, 40.0, 100.0, 0.9).unwrap());
            }
            boxes.push(BBox::new(1500.0 - 2.5 * t, 700.0, 44.0, 110.0, 0.8).unwrap());
            FrameDetections { frame: f, boxes }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_and_repeatable() {
        let a = generate_scene(&SceneConfig::short(7));
        assert_eq!(a, generate_scene(&SceneConfig::short(7)));
        assert_ne!(a, generate_scene(&SceneConfig::short(8)));
        assert_eq!(a.len(), 300);
        assert!(a.windows(2).all(|w| w[1].frame == w[0].frame + 1));
    }

    #[test]
    fn crowd_size_near_target() {
        let frames = generate_scene(&SceneConfig::short(3));
        let mean = frames.iter().map(|f| f.boxes.len()).sum::<usize>() as f64 / 300.0;
        assert!((8.0..18.0).contains(&mean), "{mean}");
    }

    #[test]
    fn walkers_and_gap() {
        let s = two_walkers(10, 3..5);
        assert_eq!(s.iter().map(|f| f.boxes.len()).collect::<Vec<_>>(), [2, 2, 1, 1, 2, 2, 2, 2, 2, 2]);
    }
}
