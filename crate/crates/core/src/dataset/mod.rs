//! From aligned full-resolution slides to model-ready datasets.

mod counts;
mod crops;
mod expand;
mod labels;
mod screening;
mod split;
mod tiling;

pub use counts::{class_weights, count_instances, ClassWeightTable, InstanceCounts};
pub use crops::{extract_crops, Crop, CropOutcome, DEFAULT_CROP_SIZE};
pub use expand::{expand_bbox, expand_unclipped, ExpansionMode};
pub use labels::{assign_classes_from_image, merge_labels, DEFAULT_MERGE_IOU};
pub use screening::{black_fraction, screen_tiles, ScreenOutcome, DEFAULT_BLACK_THRESHOLD};
pub use split::{split_dataset, validate_ratios, SplitAssignment, SplitItem, SplitOutcome, DEFAULT_RATIOS};
pub use tiling::{
    tile_image, tile_raster, Tile, TilingOutcome, DEFAULT_KEEP_FRACTION, DEFAULT_TILE_SIZE, MIN_TILE_SIZE,
};
