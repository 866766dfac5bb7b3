//! Turning class-agnostic auto labels into usable training labels.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::eval::iou;
use crate::model::{Annotation, ImageRecord};

pub const DEFAULT_MERGE_IOU: f64 = 0.5;

/// Gives every UNKNOWN annotation the record's image-level species. Manual
/// labels keep their class.
pub fn assign_classes_from_image(record: &ImageRecord, class_names: &[String]) -> Result<ImageRecord> {
    if record.annotations.iter().all(|a| a.class_id.is_some()) {
        return Ok(record.clone());
    }
    let tag = record
        .species_tag
        .as_deref()
        .ok_or_else(|| Error::MissingSpeciesTag(record.image_path.display().to_string()))?;
    let class = class_names
        .iter()
        .position(|c| c == tag)
        .ok_or_else(|| Error::InvalidManifest(format!("species tag {tag:?} is not a known class")))?;
    let mut out = record.clone();
    for a in &mut out.annotations {
        a.class_id.get_or_insert(class);
    }
    Ok(out)
}

/// Merges auto labels into the manual set.
///
/// Manual annotations are always kept. Auto annotations are visited by
/// descending confidence (ties by list order; missing confidence sorts last)
/// and dropped if they overlap a manual or an already accepted auto box at
/// `IoU >= iou_threshold`. Output: manual first, then accepted auto labels in
/// their original order.
pub fn merge_labels(manual: &[Annotation], auto: &[Annotation], iou_threshold: f64) -> Result<Vec<Annotation>> {
    if !(iou_threshold > 0.0 && iou_threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!("IoU threshold {iou_threshold} outside (0,1]")));
    }
    let mut spaces = manual.iter().chain(auto).map(|a| a.bbox.space);
    if let Some(first) = spaces.next() {
        if spaces.any(|s| s != first) {
            return Err(Error::MixedSpaces);
        }
    }

    let mut order: Vec<usize> = (0..auto.len()).collect();
    order.sort_by(|&i, &j| {
        let ci = auto[i].confidence.unwrap_or(f64::NEG_INFINITY);
        let cj = auto[j].confidence.unwrap_or(f64::NEG_INFINITY);
        cj.partial_cmp(&ci).unwrap_or(Ordering::Equal)
    });

    let mut accepted = vec![false; auto.len()];
    let mut accepted_boxes = Vec::new();
    for i in order {
        let b = &auto[i].bbox;
        let dup = manual.iter().map(|m| &m.bbox).chain(accepted_boxes.iter()).any(|o| iou(b, o) >= iou_threshold);
        if !dup {
            accepted[i] = true;
            accepted_boxes.push(*b);
        }
    }

    let mut out = manual.to_vec();
    out.extend(auto.iter().zip(&accepted).filter(|(_, &keep)| keep).map(|(a, _)| *a));
    Ok(out)
}
