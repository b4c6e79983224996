//! Axis-aligned box geometry in `xyxy` pixel coordinates.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BoundingBox {
    pub const fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Self {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    /// Converts a COCO `[x, y, w, h]` box. Returns `None` for negative extents.
    pub fn from_xywh(x: f64, y: f64, w: f64, h: f64) -> Option<Self> {
        if !(w >= 0.0 && h >= 0.0) || !x.is_finite() || !y.is_finite() {
            return None;
        }
        Some(Self::new(x, y, x + w, y + h))
    }

    pub fn to_xywh(&self) -> [f64; 4] {
        [self.x_min, self.y_min, self.width(), self.height()]
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn is_valid(&self) -> bool {
        self.x_max >= self.x_min && self.y_max >= self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }

    /// Area of the overlap with `other`, zero when disjoint.
    pub fn intersection(&self, other: &BoundingBox) -> f64 {
        let w = self.x_max.min(other.x_max) - self.x_min.max(other.x_min);
        let h = self.y_max.min(other.y_max) - self.y_min.max(other.y_min);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    /// Restricts the box to the `[0, width] x [0, height]` frame.
    pub fn clip(&self, width: f64, height: f64) -> BoundingBox {
        let x_min = self.x_min.clamp(0.0, width);
        let y_min = self.y_min.clamp(0.0, height);
        BoundingBox::new(
            x_min,
            y_min,
            self.x_max.clamp(x_min, width),
            self.y_max.clamp(y_min, height),
        )
    }
}

/// Intersection over union; 0 when the union is empty.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let inter = a.intersection(b);
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).min(1.0)
    }
}
