use nalgebra::{DMatrix, Matrix3, Vector3};

use crate::error::{Error, Result};

use super::{GroundPoint, PixelPoint, SINGULAR_EPS};

/// An invertible 3x3 plane-to-plane projective mapping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography(Matrix3<f64>);

impl Homography {
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularMatrix { det: f64::NAN });
        }
        let det = m.determinant();
        if !(det.abs() > SINGULAR_EPS) {
            return Err(Error::SingularMatrix { det });
        }
        Ok(Homography(m))
    }

    pub fn identity() -> Self {
        Homography(Matrix3::identity())
    }

    pub fn from_row_major(m: [f64; 9]) -> Result<Self> {
        Self::new(Matrix3::from_row_slice(&m))
    }

    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.0;
        [
            m[(0, 0)],
            m[(0, 1)],
            m[(0, 2)],
            m[(1, 0)],
            m[(1, 1)],
            m[(1, 2)],
            m[(2, 0)],
            m[(2, 1)],
            m[(2, 2)],
        ]
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn inverse(&self) -> Result<Homography> {
        let inv = self
            .0
            .try_inverse()
            .ok_or(Error::SingularMatrix { det: self.0.determinant() })?;
        Homography::new(inv)
    }

    /// Left-composes a uniform scale: the result maps `p` to `scale * self(p)`.
    pub fn scaled(&self, scale: f64) -> Result<Homography> {
        let s = Matrix3::new(scale, 0.0, 0.0, 0.0, scale, 0.0, 0.0, 0.0, 1.0);
        Homography::new(s * self.0)
    }

    /// Rescales so that `m33 == 1`. Fails when `m33` is numerically zero.
    pub fn normalized(&self) -> Result<Homography> {
        let m33 = self.0[(2, 2)];
        if m33.abs() < SINGULAR_EPS {
            return Err(Error::Estimation("m33 is zero, cannot normalize".into()));
        }
        Homography::new(self.0 / m33)
    }
}

/// Maps an image pixel onto the ground plane through `m` using the scalar
/// form: both numerators divided by `m31 x + m32 y + m33`.
pub fn project_to_bev(m: &Homography, p: PixelPoint) -> Result<GroundPoint> {
    let m = m.matrix();
    let den = m[(2, 0)] * p.x + m[(2, 1)] * p.y + m[(2, 2)];
    if den.abs() < SINGULAR_EPS {
        return Err(Error::HorizonPoint { x: p.x, y: p.y });
    }
    let xw = (m[(0, 0)] * p.x + m[(0, 1)] * p.y + m[(0, 2)]) / den;
    let yw = (m[(1, 0)] * p.x + m[(1, 1)] * p.y + m[(1, 2)]) / den;
    Ok(GroundPoint::new(xw, yw))
}

/// Similarity transform moving the centroid to the origin with mean
/// distance sqrt(2).
fn normalizing_transform(points: &[(f64, f64)]) -> Result<Matrix3<f64>> {
    let n = points.len() as f64;
    let (mx, my) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + x, sy + y));
    let (mx, my) = (mx / n, my / n);
    let mean_dist = points
        .iter()
        .map(|&(x, y)| ((x - mx).powi(2) + (y - my).powi(2)).sqrt())
        .sum::<f64>()
        / n;
    if !(mean_dist > SINGULAR_EPS) {
        return Err(Error::Estimation("all points coincide".into()));
    }
    let s = std::f64::consts::SQRT_2 / mean_dist;
    Ok(Matrix3::new(s, 0.0, -s * mx, 0.0, s, -s * my, 0.0, 0.0, 1.0))
}

fn apply(t: &Matrix3<f64>, (x, y): (f64, f64)) -> (f64, f64) {
    let v = t * Vector3::new(x, y, 1.0);
    (v.x / v.z, v.y / v.z)
}

/// Estimates the pixel to ground mapping from point correspondences with the
/// normalized direct linear transform. The result is scaled so `m33 == 1`.
pub fn estimate_homography(correspondences: &[(PixelPoint, GroundPoint)]) -> Result<Homography> {
    let n = correspondences.len();
    if n < 4 {
        return Err(Error::Estimation(format!(
            "need at least 4 correspondences, got {n}"
        )));
    }
    let src: Vec<(f64, f64)> = correspondences.iter().map(|(p, _)| (p.x, p.y)).collect();
    let dst: Vec<(f64, f64)> = correspondences.iter().map(|(_, g)| (g.xw, g.yw)).collect();
    if src.iter().chain(&dst).any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::Estimation("non-finite coordinate".into()));
    }
    let ts = normalizing_transform(&src)?;
    let td = normalizing_transform(&dst)?;

    // Padded to at least 9 rows so the SVD yields a full 9x9 V.
    let rows = (2 * n).max(9);
    let mut a = DMatrix::<f64>::zeros(rows, 9);
    for (i, (&s, &d)) in src.iter().zip(&dst).enumerate() {
        let (x, y) = apply(&ts, s);
        let (u, v) = apply(&td, d);
        let r = 2 * i;
        a.row_mut(r)
            .copy_from_slice(&[-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u]);
        a.row_mut(r + 1)
            .copy_from_slice(&[0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v]);
    }

    let svd = a.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Estimation("SVD did not converge".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let smallest = order[0];
    let second = svd.singular_values[order[1]];
    let largest = svd.singular_values[order[order.len() - 1]];
    if second <= 1e-10 * largest {
        return Err(Error::Estimation(
            "degenerate configuration (collinear or repeated points)".into(),
        ));
    }

    let h = v_t.row(smallest);
    let hn = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    let td_inv = td
        .try_inverse()
        .ok_or_else(|| Error::Estimation("normalization not invertible".into()))?;
    let m = td_inv * hn * ts;
    Homography::new(m)?.normalized()
}
