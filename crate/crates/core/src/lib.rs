//! Dataset engineering for paired optical and holographic microscopy.
//!
//! The crate covers the path from raw slide images to model-ready data:
//! similarity registration of holographic images onto the optical frame,
//! label propagation, tiling and black-border screening, box expansion,
//! auto-label merging, stratified splitting, class weighting, seeded
//! augmentation, and detection/classification scoring.

pub mod augment;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod model;
pub mod registration;
pub mod report;

pub use error::{Error, Result};
