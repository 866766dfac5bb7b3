use std::path::Path;

use holoalign_core::augment::{classification_policy_default, detection_policy_default, AugmentationPolicy};
use holoalign_core::dataset::{
    validate_ratios, ExpansionMode, DEFAULT_BLACK_THRESHOLD, DEFAULT_CROP_SIZE, DEFAULT_KEEP_FRACTION,
    DEFAULT_MERGE_IOU, DEFAULT_RATIOS, DEFAULT_TILE_SIZE, MIN_TILE_SIZE,
};
use holoalign_core::registration::{Interpolation, DEFAULT_MAX_PIXELS};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Every tunable of a pipeline run. Loaded from TOML; missing keys take
/// their defaults and command-line flags override what the file says.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub class_names: Vec<String>,
    pub tile_size: usize,
    pub crop_size: usize,
    pub black_threshold: f64,
    pub keep_fraction: f64,
    pub expansion_factor: f64,
    pub expansion_mode: ExpansionMode,
    pub split_ratios: [f64; 3],
    pub merge_iou: f64,
    pub interpolation: Interpolation,
    pub max_pixels: usize,
    pub detection_policy: AugmentationPolicy,
    pub classification_policy: AugmentationPolicy,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            class_names: ["T1", "T2", "T5", "T9"].map(String::from).to_vec(),
            tile_size: DEFAULT_TILE_SIZE,
            crop_size: DEFAULT_CROP_SIZE,
            black_threshold: DEFAULT_BLACK_THRESHOLD,
            keep_fraction: DEFAULT_KEEP_FRACTION,
            expansion_factor: 1.0,
            expansion_mode: ExpansionMode::Area,
            split_ratios: DEFAULT_RATIOS,
            merge_iou: DEFAULT_MERGE_IOU,
            interpolation: Interpolation::Bilinear,
            max_pixels: DEFAULT_MAX_PIXELS,
            detection_policy: detection_policy_default(),
            classification_policy: classification_policy_default(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical TOML rendering; parsing it yields an identical config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let field = |name: &str, msg: String| Err(CliError::Config(format!("{name}: {msg}")));
        if self.class_names.is_empty() {
            return field("class_names", "must not be empty".into());
        }
        let mut names = self.class_names.clone();
        names.sort();
        names.dedup();
        if names.len() != self.class_names.len() {
            return field("class_names", "must be unique".into());
        }
        if self.tile_size < MIN_TILE_SIZE {
            return field("tile_size", format!("must be at least {MIN_TILE_SIZE}"));
        }
        if self.crop_size == 0 {
            return field("crop_size", "must be positive".into());
        }
        if !(self.black_threshold > 0.0 && self.black_threshold <= 1.0) {
            return field("black_threshold", "must lie in (0, 1]".into());
        }
        if !(self.keep_fraction > 0.0 && self.keep_fraction <= 1.0) {
            return field("keep_fraction", "must lie in (0, 1]".into());
        }
        if !(self.expansion_factor.is_finite() && self.expansion_factor >= 1.0) {
            return field("expansion_factor", "must be >= 1".into());
        }
        if let Err(e) = validate_ratios(self.split_ratios) {
            return field("split_ratios", e.to_string());
        }
        if !(self.merge_iou > 0.0 && self.merge_iou <= 1.0) {
            return field("merge_iou", "must lie in (0, 1]".into());
        }
        if self.max_pixels == 0 {
            return field("max_pixels", "must be positive".into());
        }
        if let Err(e) = self.detection_policy.validate() {
            return field("detection_policy", e.to_string());
        }
        if let Err(e) = self.classification_policy.validate() {
            return field("classification_policy", e.to_string());
        }
        Ok(())
    }
}
