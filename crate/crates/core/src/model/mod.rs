//! Shared domain types and the on-disk label and manifest formats.

mod bbox;
pub mod labels;
pub mod manifest;
mod raster;
mod transform;

pub use bbox::{Annotation, BBox, ClassId, CoordSpace, LabelSource};
pub use labels::{emit_label_file, parse_label_file};
pub use manifest::{load_manifest, save_manifest, DatasetManifest, ImageRecord, Modality, Split};
pub use raster::Raster;
pub use transform::SimilarityTransform;
