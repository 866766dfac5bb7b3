//! Dataset manifest: the list of images, their modality and species, and
//! optional split assignments. Stored as JSON; see `docs/manifest.md`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::bbox::{Annotation, ClassId, CoordSpace};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Modality {
    Optical,
    Holographic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "TRAIN",
            Split::Val => "VAL",
            Split::Test => "TEST",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "TRAIN" => Ok(Split::Train),
            "VAL" => Ok(Split::Val),
            "TEST" => Ok(Split::Test),
            other => Err(Error::InvalidManifest(format!("unknown split {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub image_path: PathBuf,
    pub modality: Modality,
    /// Image-level species name; every slide holds a single species.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub species_tag: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_path: Option<PathBuf>,
    /// True when the raster is already in the optical coordinate frame.
    #[serde(default)]
    pub aligned: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub annotations: Vec<Annotation>,
}

impl ImageRecord {
    pub fn new(image_path: impl Into<PathBuf>, modality: Modality) -> Self {
        ImageRecord {
            image_path: image_path.into(),
            modality,
            species_tag: None,
            label_path: None,
            aligned: modality == Modality::Optical,
            annotations: Vec::new(),
        }
    }

    /// Key used in split maps and item names: the path's file stem.
    pub fn item_id(&self) -> String {
        self.image_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.image_path.to_string_lossy().into_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub class_names: Vec<String>,
    pub records: Vec<ImageRecord>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub splits: BTreeMap<String, Split>,
}

impl DatasetManifest {
    pub fn new(class_names: Vec<String>) -> Self {
        DatasetManifest { class_names, records: Vec::new(), splits: BTreeMap::new() }
    }

    pub fn class_index(&self, name: &str) -> Option<ClassId> {
        self.class_names.iter().position(|c| c == name)
    }

    pub fn validate(&self) -> Result<()> {
        if self.class_names.is_empty() {
            return Err(Error::InvalidManifest("class_names is empty".into()));
        }
        let mut seen = HashSet::new();
        for c in &self.class_names {
            if !seen.insert(c) {
                return Err(Error::InvalidManifest(format!("duplicate class name {c:?}")));
            }
        }
        let mut paths = HashSet::new();
        for r in &self.records {
            if !paths.insert(&r.image_path) {
                return Err(Error::InvalidManifest(format!("duplicate record path {}", r.image_path.display())));
            }
            if let Some(tag) = &r.species_tag {
                if self.class_index(tag).is_none() {
                    return Err(Error::InvalidManifest(format!(
                        "{}: species tag {tag:?} is not a known class",
                        r.image_path.display()
                    )));
                }
            }
            for (i, a) in r.annotations.iter().enumerate() {
                a.validate()?;
                if let Some(c) = a.class_id {
                    if c >= self.class_names.len() {
                        return Err(Error::InvalidManifest(format!(
                            "{}: annotation {i} has class {c} beyond the {} known classes",
                            r.image_path.display(),
                            self.class_names.len()
                        )));
                    }
                }
                if a.bbox.space == CoordSpace::Normalized && !a.bbox.within_unit() {
                    return Err(Error::InvalidManifest(format!(
                        "{}: annotation {i} leaves the unit square",
                        r.image_path.display()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn split_of(&self, record: &ImageRecord) -> Option<Split> {
        self.splits.get(&record.item_id()).copied()
    }
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let m: DatasetManifest =
        serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), message: e.to_string() })?;
    m.validate()?;
    Ok(m)
}

pub fn save_manifest(manifest: &DatasetManifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    manifest.validate()?;
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
