//! Box metrics and image to ground-plane projection.

mod bbox;
mod camera;
mod homography;

pub use bbox::{ciou_loss, foot_point, iou, BBox, CIoUBreakdown};
pub use camera::{build_projection, CameraModel};
pub use homography::{estimate_homography, project_to_bev, Homography};

/// Determinant and denominator tolerance for projective operations.
pub const SINGULAR_EPS: f64 = 1e-12;

/// A point in image pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelPoint {
    pub x: f64,
    pub y: f64,
}

impl PixelPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        PixelPoint { x, y }
    }
}

/// A point on the bird's-eye-view ground plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundPoint {
    pub xw: f64,
    pub yw: f64,
}

impl GroundPoint {
    pub const fn new(xw: f64, yw: f64) -> Self {
        GroundPoint { xw, yw }
    }

    pub fn distance(&self, other: &GroundPoint) -> f64 {
        ((self.xw - other.xw).powi(2) + (self.yw - other.yw).powi(2)).sqrt()
    }

    pub fn midpoint(&self, other: &GroundPoint) -> GroundPoint {
        GroundPoint::new((self.xw + other.xw) / 2.0, (self.yw + other.yw) / 2.0)
    }
}
