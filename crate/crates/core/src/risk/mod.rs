//! Spatio-temporal risk maps over the ground plane.

mod crowd;
mod export;
mod grid;
mod render;

pub use crowd::{CrowdGrid, DecayingField};
pub use export::{
    encode_pgm16, encode_ppm, parse_value_table, read_value_table, write_pgm16, write_ppm,
    write_value_table, format_value_table,
};
pub use grid::{GridSpec, RiskGrid, ViolationGrid};
pub use render::{hsv_to_rgb, render_heatmap, render_levels, risk_levels, RgbImage};

use crate::error::{Error, Result};

/// Row-major `width x height` matrix of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Field {
    pub fn zeros(width: usize, height: usize) -> Self {
        Field {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {width}x{height} field",
                data.len()
            )));
        }
        Ok(Field { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn min_max(&self) -> Option<(f64, f64)> {
        self.data.iter().fold(None, |acc, &v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }

    fn same_shape(&self, other: &Field) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(())
    }

    /// Elementwise combination of two equally sized fields.
    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.same_shape(other)?;
        Ok(Field {
            width: self.width,
            height: self.height,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }
}

/// Affine rescale of `x` onto `[l, u]`:
/// `l + (u - l) * (x - min) / (max - min)`. A constant input maps to `l`.
pub fn normalize(x: &Field, l: f64, u: f64) -> Field {
    let mut out = x.clone();
    let Some((lo, hi)) = x.min_max() else {
        return out;
    };
    if hi > lo {
        let span = hi - lo;
        for (o, &v) in out.data.iter_mut().zip(&x.data) {
            *o = if v == hi {
                u
            } else {
                l + (u - l) * ((v - lo) / span)
            };
        }
    } else {
        out.data.fill(l);
    }
    out
}

/// 3x3 stamp: 2 at the center, 1 on the four edge neighbours, 0 on the
/// corners.
pub const KERNEL: [(i64, i64, f64); 5] = [
    (0, 0, 2.0),
    (-1, 0, 1.0),
    (1, 0, 1.0),
    (0, -1, 1.0),
    (0, 1, 1.0),
];

/// Calls `add(index, weight)` for every in-bounds kernel cell around
/// `(cx, cy)`. Returns false, adding nothing, when the center is outside.
pub(crate) fn for_each_kernel_cell(
    width: usize,
    height: usize,
    cx: i64,
    cy: i64,
    mut add: impl FnMut(usize, f64),
) -> bool {
    let (w, h) = (width as i64, height as i64);
    if cx < 0 || cy < 0 || cx >= w || cy >= h {
        return false;
    }
    for (dx, dy, weight) in KERNEL {
        let (x, y) = (cx + dx, cy + dy);
        if x >= 0 && y >= 0 && x < w && y < h {
            add((y * w + x) as usize, weight);
        }
    }
    true
}
