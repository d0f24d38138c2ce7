use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::{normalize, Field, RgbImage};

/// Binary 16-bit graymap of the grid normalized onto `[0, 65535]`.
pub fn encode_pgm16(field: &Field) -> Vec<u8> {
    let (w, h) = (field.width(), field.height());
    let mut out = format!("P5\n{w} {h}\n65535\n").into_bytes();
    out.reserve(w * h * 2);
    // A zero grid stays zero; any other constant grid maps to 0 as well.
    for &v in normalize(field, 0.0, 65535.0).values() {
        out.extend_from_slice(&(v.round() as u16).to_be_bytes());
    }
    out
}

/// Binary 8-bit pixmap.
pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.reserve(img.pixels.len() * 3);
    for p in &img.pixels {
        out.extend_from_slice(p);
    }
    out
}

/// Text dump: `# rows cols`, then one whitespace-separated line per row.
/// Values use the shortest representation that parses back exactly.
pub fn format_value_table(field: &Field) -> String {
    let mut s = format!("# {} {}\n", field.height(), field.width());
    for row in field.values().chunks(field.width().max(1)) {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            write!(s, "{v}").unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn parse_value_table(text: &str) -> Result<Field> {
    let bad = |line: usize, message: String| Error::Parse { line, message };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| bad(1, "empty value table".into()))?;
    let dims: Vec<usize> = header
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| bad(1, "missing `# rows cols` header".into()))?
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| bad(1, format!("header: {e}")))?;
    let [rows, cols] = dims[..] else {
        return Err(bad(1, "header needs rows and cols".into()));
    };
    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (i, line) in lines {
        seen += 1;
        let before = data.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| bad(i + 1, format!("bad value `{tok}`")))?;
            data.push(v);
        }
        if data.len() - before != cols {
            return Err(bad(i + 1, format!("expected {cols} values, got {}", data.len() - before)));
        }
    }
    if seen != rows {
        return Err(Error::DimensionMismatch(format!("header says {rows} rows, found {seen}")));
    }
    Field::from_vec(cols, rows, data)
}

pub fn write_pgm16(path: &Path, field: &Field) -> Result<()> {
    fs::write(path, encode_pgm16(field)).map_err(|e| Error::io(path, e))
}

pub fn write_ppm(path: &Path, img: &RgbImage) -> Result<()> {
    fs::write(path, encode_ppm(img)).map_err(|e| Error::io(path, e))
}

pub fn write_value_table(path: &Path, field: &Field) -> Result<()> {
    fs::write(path, format_value_table(field)).map_err(|e| Error::io(path, e))
}

pub fn read_value_table(path: &Path) -> Result<Field> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_value_table(&text)
}
