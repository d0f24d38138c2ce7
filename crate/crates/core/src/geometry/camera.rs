use nalgebra::{Matrix3, Matrix3x4, Matrix4};

use crate::error::{Error, Result};

use super::Homography;

/// Pinhole camera looking down at the ground plane from `height`, tilted by
/// `theta` about the horizontal axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    pub f: f64,
    /// Pixels per unit length, horizontal.
    pub ku: f64,
    /// Pixels per unit length, vertical.
    pub kv: f64,
    pub skew: f64,
    /// Principal point.
    pub cx: f64,
    pub cy: f64,
    /// Tilt in radians.
    pub theta: f64,
    /// Camera height above the ground, meters.
    pub height: f64,
}

impl CameraModel {
    pub fn intrinsic_matrix(&self) -> Matrix3x4<f64> {
        Matrix3x4::new(
            self.f * self.ku,
            self.skew,
            self.cx,
            0.0,
            0.0,
            self.f * self.kv,
            self.cy,
            0.0,
            0.0,
            0.0,
            1.0,
            0.0,
        )
    }

    pub fn rotation_matrix(&self) -> Matrix4<f64> {
        let (s, c) = self.theta.sin_cos();
        Matrix4::new(
            1.0, 0.0, 0.0, 0.0, //
            0.0, c, -s, 0.0, //
            0.0, s, c, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        )
    }

    /// Translation along the optical axis by `-h / sin(theta)`.
    pub fn translation_matrix(&self) -> Result<Matrix4<f64>> {
        let s = self.theta.sin();
        if s.abs() < 1e-9 {
            return Err(Error::SingularTilt { theta: self.theta });
        }
        Ok(Matrix4::new(
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, -self.height / s, //
            0.0, 0.0, 0.0, 1.0,
        ))
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [self.f, self.ku, self.kv, self.skew, self.cx, self.cy, self.theta, self.height];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidCamera("non-finite parameter".into()));
        }
        if !(self.height > 0.0) {
            return Err(Error::InvalidCamera(format!(
                "height {} must be positive",
                self.height
            )));
        }
        Ok(())
    }
}

/// World ground plane (`Z_w = 0`) to image mapping `K R T` with the `Z_w`
/// column removed.
pub fn build_projection(cam: &CameraModel) -> Result<Homography> {
    cam.validate()?;
    let full = cam.intrinsic_matrix() * cam.rotation_matrix() * cam.translation_matrix()?;
    let reduced = Matrix3::from_columns(&[full.column(0), full.column(1), full.column(3)]);
    Homography::new(reduced)
}
