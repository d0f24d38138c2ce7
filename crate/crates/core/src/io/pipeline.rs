//! Per-frame orchestration and report writers.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::distancing::{
    classify_zones, frame_stats, pairwise_violations, CoupleRegistry, FramePositions,
};
use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::risk::{
    encode_pgm16, encode_ppm, format_value_table, normalize, render_levels, risk_levels,
    CrowdGrid, Field, RiskGrid, ViolationGrid,
};
use crate::tracking::{TrackId, Tracker};

use super::{Detections, RunConfig};

pub const STATS_HEADER: &str = "frame,total,red,yellow_pairs,green,new_ids,dead_ids";

/// One row of the stats table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameReport {
    pub frame: u64,
    pub total: usize,
    pub red: usize,
    pub yellow_pairs: usize,
    pub green: usize,
    pub new_ids: usize,
    pub dead_ids: usize,
}

/// One confirmed track on one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackRow {
    pub frame: u64,
    pub id: TrackId,
    pub bbox: BBox,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Summary {
    pub frames: usize,
    pub detections_accepted: usize,
    pub detections_rejected: usize,
    pub detections_below_threshold: usize,
    pub unique_ids: usize,
    pub person_frames: usize,
    pub red_person_frames: usize,
    /// `red_person_frames / person_frames`, 0 for an empty run.
    pub violation_ratio: f64,
    /// Earliest frame with the most red people.
    pub peak_frame: Option<u64>,
    pub peak_red: usize,
    pub dropped_stamps: u64,
}

/// Streaming pipeline state for one camera.
#[derive(Debug, Clone)]
pub struct Pipeline {
    config: RunConfig,
    tracker: Tracker,
    analytics: bool,
    couples: CoupleRegistry,
    tracking: RiskGrid,
    violations: ViolationGrid,
    crowd: Option<CrowdGrid>,
    reports: Vec<FrameReport>,
    tracks: Vec<TrackRow>,
    ids: BTreeSet<TrackId>,
    frames: usize,
    detections: usize,
}

impl Pipeline {
    /// Full analysis: tracking, distancing and risk maps.
    pub fn new(config: RunConfig) -> Result<Self> {
        Self::build(config, true)
    }

    /// Tracking only; reports and grids stay empty.
    pub fn tracking_only(config: RunConfig) -> Result<Self> {
        Self::build(config, false)
    }

    fn build(config: RunConfig, analytics: bool) -> Result<Self> {
        let ground = config.ground_homography()?;
        let spec = config.risk.grid;
        let r = &config.risk;
        Ok(Pipeline {
            tracker: Tracker::new(config.tracker, ground),
            analytics,
            couples: CoupleRegistry::new(),
            tracking: RiskGrid::new(spec),
            violations: ViolationGrid::new(spec, r.alpha, r.beta, r.delta),
            crowd: r
                .crowd_enabled
                .then(|| CrowdGrid::new(spec, r.decay_gamma, r.long_term_smoothing)),
            reports: Vec::new(),
            tracks: Vec::new(),
            ids: BTreeSet::new(),
            frames: 0,
            detections: 0,
            config,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    /// Processes one frame. Frames must strictly increase; errors carry the
    /// frame number.
    pub fn step(&mut self, frame: u64, boxes: &[BBox]) -> Result<FrameReport> {
        self.step_inner(frame, boxes).map_err(|e| Error::AtFrame {
            frame,
            source: Box::new(e),
        })
    }

    fn step_inner(&mut self, frame: u64, boxes: &[BBox]) -> Result<FrameReport> {
        self.frames += 1;
        self.detections += boxes.len();
        let out = self.tracker.step(boxes, frame)?;
        for s in &out.confirmed {
            self.ids.insert(s.id);
            self.tracks.push(TrackRow {
                frame,
                id: s.id,
                bbox: s.bbox,
            });
        }
        let mut report = FrameReport {
            frame,
            total: out.confirmed.len(),
            red: 0,
            yellow_pairs: 0,
            green: 0,
            new_ids: out.new_ids.len(),
            dead_ids: out.dead_ids.len(),
        };
        if !self.analytics {
            return Ok(report);
        }

        let pos = FramePositions::new(frame, out.confirmed.iter().map(|s| (s.id, s.ground)).collect())?;
        let policy = &self.config.policy;
        let violations = pairwise_violations(&pos, policy);
        let registry = if self.config.couples_enabled {
            self.couples.update(&pos, policy);
            Some(&self.couples)
        } else {
            None
        };
        let labels = classify_zones(&pos, &violations, registry, policy)?;
        let counts = frame_stats(&labels);
        report.red = counts.red;
        report.yellow_pairs = counts.yellow_pairs;
        report.green = counts.green;

        self.tracking.accumulate_tracking(&pos);
        self.violations.accumulate_violations(&labels, &pos);
        if let Some(crowd) = &mut self.crowd {
            crowd.crowd_step(&pos);
        }
        self.reports.push(report);
        Ok(report)
    }

    pub fn finish(self, ingest: &Detections, below_threshold: usize) -> Analysis {
        let person_frames: usize = self.reports.iter().map(|r| r.total).sum();
        let red_person_frames: usize = self.reports.iter().map(|r| r.red).sum();
        let peak = self
            .reports
            .iter()
            .fold(None::<&FrameReport>, |best, r| match best {
                Some(b) if b.red >= r.red => Some(b),
                _ => Some(r),
            });
        let summary = Summary {
            frames: self.frames,
            detections_accepted: self.detections,
            detections_rejected: ingest.rejected,
            detections_below_threshold: below_threshold,
            unique_ids: self.ids.len(),
            person_frames,
            red_person_frames,
            violation_ratio: if person_frames == 0 {
                0.0
            } else {
                red_person_frames as f64 / person_frames as f64
            },
            peak_frame: peak.map(|r| r.frame),
            peak_red: peak.map_or(0, |r| r.red),
            dropped_stamps: self.tracking.dropped(),
        };
        Analysis {
            analytics: self.analytics,
            reports: self.reports,
            tracks: self.tracks,
            tracking: self.tracking,
            violations: self.violations,
            crowd: self.crowd,
            summary,
        }
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct Analysis {
    analytics: bool,
    pub reports: Vec<FrameReport>,
    pub tracks: Vec<TrackRow>,
    pub tracking: RiskGrid,
    pub violations: ViolationGrid,
    pub crowd: Option<CrowdGrid>,
    pub summary: Summary,
}

fn run(mut pipeline: Pipeline, mut detections: Detections) -> Result<Analysis> {
    let below = detections.apply_threshold(pipeline.config.conf_threshold);
    // Frames missing from the input are processed as empty frames so that
    // track ages advance.
    if let (Some(first), Some(last)) = (detections.frames.first(), detections.frames.last()) {
        let (first, last) = (first.frame, last.frame);
        let mut next = detections.frames.iter().peekable();
        for frame in first..=last {
            let boxes = match next.peek() {
                Some(f) if f.frame == frame => &next.next().unwrap().boxes[..],
                _ => &[],
            };
            pipeline.step(frame, boxes)?;
        }
    }
    Ok(pipeline.finish(&detections, below))
}

/// Runs the full analysis over ingested detections.
pub fn run_pipeline(config: &RunConfig, detections: Detections) -> Result<Analysis> {
    run(Pipeline::new(config.clone())?, detections)
}

/// Runs the tracker alone.
pub fn run_tracking(config: &RunConfig, detections: Detections) -> Result<Analysis> {
    run(Pipeline::tracking_only(config.clone())?, detections)
}

pub fn format_stats(reports: &[FrameReport]) -> String {
    let mut s = String::with_capacity(32 * (reports.len() + 1));
    s.push_str(STATS_HEADER);
    s.push('\n');
    for r in reports {
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.frame, r.total, r.red, r.yellow_pairs, r.green, r.new_ids, r.dead_ids
        )
        .unwrap();
    }
    s
}

/// MOTChallenge result lines, two decimals.
pub fn format_tracks(rows: &[TrackRow]) -> String {
    let mut s = String::with_capacity(48 * rows.len());
    for r in rows {
        let [l, t, w, h] = r.bbox.to_ltwh();
        writeln!(
            s,
            "{},{},{l:.2},{t:.2},{w:.2},{h:.2},{:.2},-1,-1,-1",
            r.frame, r.id, r.bbox.conf
        )
        .unwrap();
    }
    s
}

pub const TRACKS_FILE: &str = "tracks.txt";
pub const STATS_FILE: &str = "stats.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const TRACKING_TABLE: &str = "tracking_grid.txt";
pub const VIOLATION_TABLE: &str = "violation_grid.txt";
pub const CROWD_TABLE: &str = "crowd_grid.txt";
pub const CROWD_LONG_TERM_TABLE: &str = "crowd_long_term.txt";
pub const HEATMAP_FILE: &str = "heatmap.ppm";
pub const CROWD_HEATMAP_FILE: &str = "crowd_heatmap.ppm";

fn write(dir: &Path, name: &str, bytes: impl AsRef<[u8]>, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

/// Grid table and its grayscale raster, `<stem>.txt` and `<stem>.pgm`.
fn write_grid(dir: &Path, table: &str, field: &Field, written: &mut Vec<PathBuf>) -> Result<()> {
    write(dir, table, format_value_table(field), written)?;
    write(dir, &table.replace(".txt", ".pgm"), encode_pgm16(field), written)
}

/// Heat map of the tracking grid and the combined violation field, plus
/// their tables and rasters.
pub fn write_risk_rasters(
    dir: &Path,
    tracking: &Field,
    combined: &Field,
    written: &mut Vec<PathBuf>,
) -> Result<()> {
    let heat = render_levels(&risk_levels(tracking, combined)?)?;
    write_grid(dir, TRACKING_TABLE, tracking, written)?;
    write_grid(dir, VIOLATION_TABLE, combined, written)?;
    write(dir, HEATMAP_FILE, encode_ppm(&heat), written)
}

/// Crowd table, raster and heat map.
pub fn write_crowd_rasters(
    dir: &Path,
    current: &Field,
    long_term: Option<&Field>,
    written: &mut Vec<PathBuf>,
) -> Result<()> {
    write_grid(dir, CROWD_TABLE, current, written)?;
    let levels = normalize(current, 0.0, 120.0);
    write(dir, CROWD_HEATMAP_FILE, encode_ppm(&render_levels(&levels)?), written)?;
    if let Some(lt) = long_term {
        write_grid(dir, CROWD_LONG_TERM_TABLE, lt, written)?;
    }
    Ok(())
}

impl Analysis {
    pub fn summary_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.summary).expect("plain struct");
        s.push('\n');
        s
    }

    /// Writes every artifact into `dir`, creating it. Returns the paths
    /// written.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        write(dir, TRACKS_FILE, format_tracks(&self.tracks), &mut written)?;
        if !self.analytics {
            return Ok(written);
        }
        write(dir, STATS_FILE, format_stats(&self.reports), &mut written)?;
        write(dir, SUMMARY_FILE, self.summary_json(), &mut written)?;
        write_risk_rasters(dir, self.tracking.field(), &self.violations.combined(), &mut written)?;
        if let Some(crowd) = &self.crowd {
            write_crowd_rasters(dir, &crowd.field(), crowd.long_term_field().as_ref(), &mut written)?;
        }
        Ok(written)
    }
}
