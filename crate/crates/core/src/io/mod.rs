//! Detection ingest, run configuration and the per-frame pipeline.

pub mod config;
pub mod detections;
pub mod pipeline;

pub use config::{
    format_homography_block, load_config, parse_config, parse_correspondences, GroundSource,
    RiskConfig, RunConfig, ENV_PREFIX,
};
pub use detections::{
    format_jsonl_detections, format_mot_detections, parse_jsonl_detections, parse_mot_detections,
    DetectionRecord, Detections, FrameDetections,
};
pub use pipeline::{
    format_stats, format_tracks, run_pipeline, run_tracking, write_crowd_rasters,
    write_risk_rasters, Analysis, FrameReport, Pipeline, Summary, TrackRow, CROWD_LONG_TERM_TABLE,
    CROWD_TABLE, TRACKING_TABLE, VIOLATION_TABLE,
};
