//! Detection ingest: MOTChallenge det files and line-delimited JSON.

use std::io::BufRead;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::BBox;

/// One accepted detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionRecord {
    pub frame: u64,
    pub bbox: BBox,
}

/// All detections of one frame, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameDetections {
    pub frame: u64,
    pub boxes: Vec<BBox>,
}

/// Parsed detections grouped by ascending frame.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Detections {
    pub frames: Vec<FrameDetections>,
    /// Records dropped for violating box invariants.
    pub rejected: usize,
    /// One message per rejected record.
    pub warnings: Vec<String>,
}

impl Detections {
    pub fn record_count(&self) -> usize {
        self.frames.iter().map(|f| f.boxes.len()).sum()
    }

    /// Drops detections with `conf < threshold`; returns how many went.
    pub fn apply_threshold(&mut self, threshold: f64) -> usize {
        let mut dropped = 0;
        for f in &mut self.frames {
            let before = f.boxes.len();
            f.boxes.retain(|b| b.conf >= threshold);
            dropped += before - f.boxes.len();
        }
        dropped
    }

    fn from_records(mut records: Vec<DetectionRecord>, rejected: usize, warnings: Vec<String>) -> Self {
        // Stable: detections keep their order within a frame.
        records.sort_by_key(|r| r.frame);
        let mut frames: Vec<FrameDetections> = Vec::new();
        for r in records {
            match frames.last_mut() {
                Some(last) if last.frame == r.frame => last.boxes.push(r.bbox),
                _ => frames.push(FrameDetections {
                    frame: r.frame,
                    boxes: vec![r.bbox],
                }),
            }
        }
        Detections {
            frames,
            rejected,
            warnings,
        }
    }
}

/// Accepts `7`, `7.0` and `7.000`; anything fractional is malformed.
fn parse_frame(tok: &str) -> Option<i64> {
    if let Ok(v) = tok.parse::<i64>() {
        return Some(v);
    }
    let v: f64 = tok.parse().ok()?;
    (v.fract() == 0.0 && v.abs() < 9e15).then_some(v as i64)
}

/// Splits records into accepted boxes and rejection warnings.
struct Collector {
    records: Vec<DetectionRecord>,
    rejected: usize,
    warnings: Vec<String>,
}

impl Collector {
    fn new() -> Self {
        Collector {
            records: Vec::new(),
            rejected: 0,
            warnings: Vec::new(),
        }
    }

    fn push(&mut self, line: usize, frame: i64, bbox: Result<BBox>) {
        match (frame, bbox) {
            (f, _) if f < 1 => self.reject(line, format!("frame {f} < 1")),
            (f, Ok(bbox)) => self.records.push(DetectionRecord {
                frame: f as u64,
                bbox,
            }),
            (_, Err(e)) => self.reject(line, e.to_string()),
        }
    }

    fn reject(&mut self, line: usize, why: String) {
        self.rejected += 1;
        self.warnings.push(format!("line {line}: rejected: {why}"));
    }

    fn finish(self) -> Detections {
        Detections::from_records(self.records, self.rejected, self.warnings)
    }
}

fn read_lines(reader: impl BufRead) -> impl Iterator<Item = Result<(usize, String)>> {
    reader.lines().enumerate().map(|(i, l)| {
        l.map(|l| (i + 1, l)).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })
    })
}

/// Parses `frame,id,bb_left,bb_top,bb_width,bb_height,conf[,x,y,z]`.
/// The id column is ignored.
pub fn parse_mot_detections(reader: impl BufRead) -> Result<Detections> {
    let mut out = Collector::new();
    for item in read_lines(reader) {
        let (line, text) = item?;
        let text = text.trim();
        if text.is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split(',').map(str::trim).collect();
        if fields.len() < 7 {
            return Err(Error::Parse {
                line,
                message: format!("expected at least 7 fields, got {}", fields.len()),
            });
        }
        let frame = parse_frame(fields[0]).ok_or_else(|| Error::Parse {
            line,
            message: format!("bad frame `{}`", fields[0]),
        })?;
        let mut nums = [0.0; 5];
        for (slot, tok) in nums.iter_mut().zip(&fields[2..7]) {
            *slot = tok.parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad number `{tok}`"),
            })?;
        }
        let [left, top, w, h, conf] = nums;
        out.push(line, frame, BBox::from_ltwh(left, top, w, h, conf));
    }
    Ok(out.finish())
}

#[derive(Deserialize)]
struct JsonRecord {
    frame: i64,
    x: f64,
    y: f64,
    w: f64,
    h: f64,
    conf: f64,
}

/// Parses one `{frame, x, y, w, h, conf}` object per line, `(x, y)` being
/// the box center.
pub fn parse_jsonl_detections(reader: impl BufRead) -> Result<Detections> {
    let mut out = Collector::new();
    for item in read_lines(reader) {
        let (line, text) = item?;
        if text.trim().is_empty() {
            continue;
        }
        let r: JsonRecord = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        out.push(line, r.frame, BBox::new(r.x, r.y, r.w, r.h, r.conf));
    }
    Ok(out.finish())
}

/// Writes detections back as MOT det lines.
pub fn format_mot_detections(frames: &[FrameDetections]) -> String {
    let mut s = String::new();
    for f in frames {
        for b in &f.boxes {
            let [l, t, w, h] = b.to_ltwh();
            s.push_str(&format!("{},-1,{l},{t},{w},{h},{},-1,-1,-1\n", f.frame, b.conf));
        }
    }
    s
}

/// Writes detections as JSON lines with center coordinates.
pub fn format_jsonl_detections(frames: &[FrameDetections]) -> String {
    let mut s = String::new();
    for f in frames {
        for b in &f.boxes {
            let v = serde_json::json!({
                "frame": f.frame, "x": b.cx, "y": b.cy, "w": b.w, "h": b.h, "conf": b.conf,
            });
            s.push_str(&v.to_string());
            s.push('\n');
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mot(text: &str) -> Result<Detections> {
        parse_mot_detections(text.as_bytes())
    }

    #[test]
    fn mot_line_to_center_box() {
        let d = mot("1,-1,100,200,50,100,0.9,-1,-1,-1\n").unwrap();
        assert_eq!(d.frames.len(), 1);
        assert_eq!(d.frames[0].frame, 1);
        let b = d.frames[0].boxes[0];
        assert_eq!((b.cx, b.cy, b.w, b.h, b.conf), (125.0, 250.0, 50.0, 100.0, 0.9));
    }

    #[test]
    fn empty_input() {
        let d = mot("").unwrap();
        assert!(d.frames.is_empty());
        assert_eq!(d.rejected, 0);
    }

    #[test]
    fn frames_are_grouped_and_sorted_stably() {
        let d = mot("2,-1,0,0,1,1,0.5\n1,-1,5,0,1,1,0.5\n1,-1,9,0,1,1,0.5\n").unwrap();
        assert_eq!(d.frames.iter().map(|f| f.frame).collect::<Vec<_>>(), vec![1, 2]);
        let lefts: Vec<f64> = d.frames[0].boxes.iter().map(|b| b.to_ltwh()[0]).collect();
        assert_eq!(lefts, vec![5.0, 9.0]);
    }

    #[test]
    fn bad_boxes_are_counted_not_fatal() {
        let d = mot("1,-1,0,0,0,10,0.5\n1,-1,0,0,10,-2,0.5\n1,-1,0,0,10,10,1.5\n0,-1,0,0,1,1,0.5\n1,-1,0,0,1,1,0.5\n").unwrap();
        assert_eq!(d.rejected, 4);
        assert_eq!(d.warnings.len(), 4);
        assert!(d.warnings[0].starts_with("line 1:"));
        assert_eq!(d.record_count(), 1);
    }

    #[test]
    fn malformed_lines_report_numbers() {
        assert!(matches!(mot("1,-1,0,0,1,1,0.5\n1,-1,zero,0,1,1,0.5\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(mot("\n1,2,3\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(mot("1.5,-1,0,0,1,1,0.5\n"), Err(Error::Parse { line: 1, .. })));
        assert_eq!(mot("3.0,-1,0,0,1,1,0.5").unwrap().frames[0].frame, 3);
    }

    #[test]
    fn jsonl_records() {
        let d = parse_jsonl_detections(
            &b"{\"frame\":1,\"x\":125,\"y\":250,\"w\":50,\"h\":100,\"conf\":0.9}\n"[..],
        )
        .unwrap();
        assert_eq!(d.record_count(), 1);
        assert_eq!(d.frames[0].boxes[0], BBox::new(125.0, 250.0, 50.0, 100.0, 0.9).unwrap());

        let d = parse_jsonl_detections(&b"{\"frame\":1,\"x\":1,\"y\":1,\"w\":5,\"h\":5,\"conf\":1.2}\n"[..]).unwrap();
        assert_eq!((d.record_count(), d.rejected), (0, 1));

        assert!(matches!(
            parse_jsonl_detections(&b"\n{\"frame\":1,\"x\":1}\n"[..]),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn threshold() {
        let mut d = mot("1,-1,0,0,1,1,0.2\n1,-1,0,0,1,1,0.3\n2,-1,0,0,1,1,0.1\n").unwrap();
        assert_eq!(d.apply_threshold(0.3), 2);
        assert_eq!(d.record_count(), 1);
    }

    #[test]
    fn both_formats_round_trip() {
        let text = "1,-1,100.5,200.25,50,100,0.9,-1,-1,-1\n3,-1,7,8,9.5,10,0.75,-1,-1,-1\n";
        let d = mot(text).unwrap();
        assert_eq!(mot(&format_mot_detections(&d.frames)).unwrap(), d);
        let j = parse_jsonl_detections(format_jsonl_detections(&d.frames).as_bytes()).unwrap();
        assert_eq!(j, d);
    }
}
