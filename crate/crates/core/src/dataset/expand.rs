use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::BBox;

/// How an expansion factor is applied to a box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpansionMode {
    /// The factor scales the area; each side grows by its square root.
    #[default]
    Area,
    /// The factor scales each side.
    Side,
}

impl ExpansionMode {
    pub fn side_factor(self, factor: f64) -> f64 {
        match self {
            ExpansionMode::Area => factor.sqrt(),
            ExpansionMode::Side => factor,
        }
    }
}

fn check_factor(factor: f64) -> Result<()> {
    if !(factor.is_finite() && factor >= 1.0) {
        return Err(Error::InvalidArgument(format!("expansion factor must be >= 1, got {factor}")));
    }
    Ok(())
}

/// Grows `b` about its centre without clipping.
pub fn expand_unclipped(b: &BBox, factor: f64, mode: ExpansionMode) -> Result<BBox> {
    check_factor(factor)?;
    let s = mode.side_factor(factor);
    Ok(BBox { w: b.w * s, h: b.h * s, ..*b })
}

/// Grows `b` about its centre, then clips it to `[0, width] × [0, height]`
/// (in the box's own coordinate space).
pub fn expand_bbox(b: &BBox, factor: f64, bounds: (f64, f64), mode: ExpansionMode) -> Result<BBox> {
    let grown = expand_unclipped(b, factor, mode)?;
    grown.clip_to(bounds.0, bounds.1).ok_or_else(|| Error::InvalidBox("expanded box lies outside the image".into()))
}
