use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coordinate space of a box: fractions of the image size, or pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoordSpace {
    Normalized,
    Pixel,
}

/// Axis-aligned box stored as centre plus extent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    pub space: CoordSpace,
}

impl BBox {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64, space: CoordSpace) -> Result<Self> {
        if ![cx, cy, w, h].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidBox(format!("non-finite field in ({cx}, {cy}, {w}, {h})")));
        }
        if w <= 0.0 || h <= 0.0 {
            return Err(Error::InvalidBox(format!("extent must be positive, got {w}x{h}")));
        }
        let unit = 0.0..=1.0;
        if space == CoordSpace::Normalized && !(unit.contains(&cx) && unit.contains(&cy)) {
            return Err(Error::InvalidBox(format!("normalized centre ({cx}, {cy}) outside [0,1]")));
        }
        Ok(BBox { cx, cy, w, h, space })
    }

    pub fn pixel(cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        BBox::new(cx, cy, w, h, CoordSpace::Pixel)
    }

    pub fn normalized(cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        BBox::new(cx, cy, w, h, CoordSpace::Normalized)
    }

    /// Box from corner coordinates `(x0, y0)`–`(x1, y1)`.
    pub fn from_corners(x0: f64, y0: f64, x1: f64, y1: f64, space: CoordSpace) -> Result<Self> {
        BBox::new((x0 + x1) / 2.0, (y0 + y1) / 2.0, x1 - x0, y1 - y0, space)
    }

    /// `(x0, y0, x1, y1)`.
    pub fn corners(&self) -> (f64, f64, f64, f64) {
        (self.cx - self.w / 2.0, self.cy - self.h / 2.0, self.cx + self.w / 2.0, self.cy + self.h / 2.0)
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn intersection_area(&self, other: &BBox) -> f64 {
        let (ax0, ay0, ax1, ay1) = self.corners();
        let (bx0, by0, bx1, by1) = other.corners();
        let iw = (ax1.min(bx1) - ax0.max(bx0)).max(0.0);
        let ih = (ay1.min(by1) - ay0.max(by0)).max(0.0);
        iw * ih
    }

    /// Whether the whole box lies inside the unit square (with a small slack
    /// for values that went through 6-decimal text).
    pub fn within_unit(&self) -> bool {
        let (x0, y0, x1, y1) = self.corners();
        const SLACK: f64 = 1e-6;
        x0 >= -SLACK && y0 >= -SLACK && x1 <= 1.0 + SLACK && y1 <= 1.0 + SLACK
    }

    pub fn to_pixel(&self, width: usize, height: usize) -> BBox {
        match self.space {
            CoordSpace::Pixel => *self,
            CoordSpace::Normalized => BBox {
                cx: self.cx * width as f64,
                cy: self.cy * height as f64,
                w: self.w * width as f64,
                h: self.h * height as f64,
                space: CoordSpace::Pixel,
            },
        }
    }

    pub fn to_normalized(&self, width: usize, height: usize) -> BBox {
        match self.space {
            CoordSpace::Normalized => *self,
            CoordSpace::Pixel => BBox {
                cx: self.cx / width as f64,
                cy: self.cy / height as f64,
                w: self.w / width as f64,
                h: self.h / height as f64,
                space: CoordSpace::Normalized,
            },
        }
    }

    /// Clips the box to `[0, width] x [0, height]` in its own space. Returns
    /// `None` when nothing of it remains.
    pub fn clip_to(&self, width: f64, height: f64) -> Option<BBox> {
        let (x0, y0, x1, y1) = self.corners();
        let (x0, y0) = (x0.max(0.0), y0.max(0.0));
        let (x1, y1) = (x1.min(width), y1.min(height));
        if x1 <= x0 || y1 <= y0 {
            return None;
        }
        Some(BBox { cx: (x0 + x1) / 2.0, cy: (y0 + y1) / 2.0, w: x1 - x0, h: y1 - y0, space: self.space })
    }
}

/// Index into a manifest's `class_names`.
pub type ClassId = usize;

/// Who produced an annotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LabelSource {
    Manual,
    Auto,
}

/// A labelled box. `class_id == None` is the class-agnostic UNKNOWN label
/// produced by the auto-labeller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    #[serde(rename = "box")]
    pub bbox: BBox,
    pub class_id: Option<ClassId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    pub source: LabelSource,
}

impl Annotation {
    pub fn new(bbox: BBox, class_id: Option<ClassId>, confidence: Option<f64>, source: LabelSource) -> Result<Self> {
        let a = Annotation { bbox, class_id, confidence, source };
        a.validate()?;
        Ok(a)
    }

    pub fn manual(bbox: BBox, class_id: ClassId) -> Self {
        Annotation { bbox, class_id: Some(class_id), confidence: None, source: LabelSource::Manual }
    }

    pub fn auto(bbox: BBox, class_id: Option<ClassId>, confidence: Option<f64>) -> Self {
        Annotation { bbox, class_id, confidence, source: LabelSource::Auto }
    }

    pub fn validate(&self) -> Result<()> {
        if self.source == LabelSource::Manual && self.class_id.is_none() {
            return Err(Error::InvalidAnnotation("manual annotations need a concrete class".into()));
        }
        if let Some(c) = self.confidence {
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::InvalidAnnotation(format!("confidence {c} outside [0,1]")));
            }
        }
        Ok(())
    }

    pub fn with_box(self, bbox: BBox) -> Self {
        Annotation { bbox, ..self }
    }
}
