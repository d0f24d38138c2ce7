use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::PixelPoint;

/// Axis-aligned person box in image pixels, stored in center format.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    pub conf: f64,
}

impl BBox {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64, conf: f64) -> Result<Self> {
        let b = BBox { cx, cy, w, h, conf };
        b.validate()?;
        Ok(b)
    }

    /// Center-format box with confidence 1.
    pub fn centered(cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        Self::new(cx, cy, w, h, 1.0)
    }

    /// Builds a box from MOT-style `left, top, width, height`.
    pub fn from_ltwh(left: f64, top: f64, w: f64, h: f64, conf: f64) -> Result<Self> {
        Self::new(left + w / 2.0, top + h / 2.0, w, h, conf)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cx.is_finite() && self.cy.is_finite()) {
            return Err(Error::InvalidBox("center is not finite".into()));
        }
        if !(self.w > 0.0 && self.w.is_finite()) {
            return Err(Error::InvalidBox(format!("width {} must be positive", self.w)));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidBox(format!("height {} must be positive", self.h)));
        }
        if !(0.0..=1.0).contains(&self.conf) {
            return Err(Error::InvalidBox(format!(
                "confidence {} outside [0, 1]",
                self.conf
            )));
        }
        Ok(())
    }

    /// `(left, top, width, height)`.
    pub fn to_ltwh(&self) -> [f64; 4] {
        [self.cx - self.w / 2.0, self.cy - self.h / 2.0, self.w, self.h]
    }

    /// `(x1, y1, x2, y2)` corner format.
    pub fn to_corners(&self) -> [f64; 4] {
        let hw = self.w / 2.0;
        let hh = self.h / 2.0;
        [self.cx - hw, self.cy - hh, self.cx + hw, self.cy + hh]
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }
}

/// Intersection over union of two boxes. Disjoint or edge-touching boxes
/// give exactly `0.0`.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let [ax1, ay1, ax2, ay2] = a.to_corners();
    let [bx1, by1, bx2, by2] = b.to_corners();
    let iw = ax2.min(bx2) - ax1.max(bx1);
    let ih = ay2.min(by2) - ay1.max(by1);
    if iw <= 0.0 || ih <= 0.0 {
        return 0.0;
    }
    let inter = iw * ih;
    // Areas from the same corners as the overlap, so a box against itself
    // gives exactly 1.
    let union = (ax2 - ax1) * (ay2 - ay1) + (bx2 - bx1) * (by2 - by1) - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// Every term of the complete-IoU loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CIoUBreakdown {
    pub iou: f64,
    /// Squared distance between the box centers.
    pub rho2: f64,
    /// Squared diagonal of the smallest box enclosing both.
    pub c2: f64,
    /// Aspect-ratio consistency.
    pub v: f64,
    /// Trade-off weight on `v`.
    pub alpha: f64,
    pub loss: f64,
}

/// Complete-IoU loss of a predicted box against a ground-truth box:
/// `1 - IoU + rho^2 / c^2 + alpha * v`.
pub fn ciou_loss(pred: &BBox, gt: &BBox) -> CIoUBreakdown {
    let iou = iou(pred, gt);
    let rho2 = (pred.cx - gt.cx).powi(2) + (pred.cy - gt.cy).powi(2);

    let [px1, py1, px2, py2] = pred.to_corners();
    let [gx1, gy1, gx2, gy2] = gt.to_corners();
    let ew = px2.max(gx2) - px1.min(gx1);
    let eh = py2.max(gy2) - py1.min(gy1);
    let c2 = ew * ew + eh * eh;

    let dv = (gt.w / gt.h).atan() - (pred.w / pred.h).atan();
    let v = 4.0 / (PI * PI) * dv * dv;
    let denom = (1.0 - iou) + v;
    let alpha = if denom > 0.0 { v / denom } else { 0.0 };

    if c2 <= 0.0 {
        // Only reachable for coincident zero-extent boxes.
        return CIoUBreakdown {
            iou,
            rho2: 0.0,
            c2,
            v,
            alpha,
            loss: 1.0 - iou,
        };
    }
    CIoUBreakdown {
        iou,
        rho2,
        c2,
        v,
        alpha,
        loss: 1.0 - iou + rho2 / c2 + alpha * v,
    }
}

/// Midpoint of the bottom edge of the box: the standing point on the ground.
pub fn foot_point(b: &BBox) -> PixelPoint {
    PixelPoint::new(b.cx, b.cy + b.h / 2.0)
}
