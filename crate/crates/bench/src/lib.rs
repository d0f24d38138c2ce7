//! Fixtures shared by the benchmarks.

use sdmon_core::io::{FrameDetections, GroundSource, RunConfig};
use sdmon_core::synthetic::{generate_scene, SceneConfig};
use sdmon_core::{FramePositions, GroundPoint, Homography, Result, TrackId};

/// Busy-plaza run settings: a quarter-scale ground plane and one grid cell
/// per image pixel.
pub fn plaza_config() -> RunConfig {
    let mut config = RunConfig {
        ground: GroundSource::Homography(Homography::identity().scaled(0.25).expect("positive scale")),
        ..RunConfig::default()
    };
    config.risk.grid.cell_scale = 0.25;
    config
}

/// The first `frames` frames of the seeded busy-plaza scene.
pub fn plaza_frames(frames: u64) -> Vec<FrameDetections> {
    generate_scene(&SceneConfig {
        frames,
        ..SceneConfig::town_centre(2021)
    })
}

/// `n` people on a square lattice with the given spacing, ids from 1.
pub fn lattice(n: usize, spacing: f64) -> Result<FramePositions> {
    let side = (n as f64).sqrt().ceil() as usize;
    let entries = (0..n)
        .map(|i| {
            let p = GroundPoint::new((i % side) as f64 * spacing, (i / side) as f64 * spacing);
            (TrackId(i as u64 + 1), p)
        })
        .collect();
    FramePositions::new(1, entries)
}
