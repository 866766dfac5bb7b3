//! Plain-text label files: one `class cx cy w h [conf]` line per box.
//!
//! Class `-1` is the class-agnostic UNKNOWN label. Emitted values carry six
//! decimal places.

use std::fmt::Write as _;

use super::bbox::{Annotation, BBox, CoordSpace, LabelSource};
use crate::error::{Error, LineError, Result};

pub const UNKNOWN_CLASS: i64 = -1;

/// Parses label-file text. Every malformed line is collected and reported
/// together; an empty file yields an empty list.
///
/// The file format does not carry provenance, so the caller states which
/// `source` the lines come from. Lines with class `-1` are always AUTO.
pub fn parse_label_file(text: &str, space: CoordSpace, source: LabelSource) -> Result<Vec<Annotation>> {
    let mut out = Vec::new();
    let mut errors = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        match parse_line(line, space, source) {
            Ok(a) => out.push(a),
            Err(message) => errors.push(LineError { line: idx + 1, message }),
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(Error::MalformedLabels(errors))
    }
}

fn parse_line(line: &str, space: CoordSpace, source: LabelSource) -> std::result::Result<Annotation, String> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 5 && fields.len() != 6 {
        return Err(format!("expected 5 or 6 fields, found {}", fields.len()));
    }
    let class: i64 = fields[0].parse().map_err(|_| format!("class {:?} is not an integer", fields[0]))?;
    let class_id = match class {
        UNKNOWN_CLASS => None,
        c if c >= 0 => Some(c as usize),
        c => return Err(format!("class {c} is negative")),
    };
    let mut nums = [0.0f64; 5];
    for (i, f) in fields[1..].iter().enumerate() {
        nums[i] = f.parse().map_err(|_| format!("field {} ({f:?}) is not a number", i + 2))?;
        if !nums[i].is_finite() {
            return Err(format!("field {} is not finite", i + 2));
        }
    }
    let [cx, cy, w, h, conf] = nums;
    if space == CoordSpace::Normalized {
        for (name, v) in [("cx", cx), ("cy", cy), ("w", w), ("h", h)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name}={v} outside [0,1]"));
            }
        }
    }
    let bbox = BBox::new(cx, cy, w, h, space).map_err(|e| e.to_string())?;
    let confidence = (fields.len() == 6).then_some(conf);
    if let Some(c) = confidence {
        if !(0.0..=1.0).contains(&c) {
            return Err(format!("confidence {c} outside [0,1]"));
        }
    }
    let source = if class_id.is_none() { LabelSource::Auto } else { source };
    Ok(Annotation { bbox, class_id, confidence, source })
}

/// Renders annotations as label-file text. All boxes must be normalized.
pub fn emit_label_file(annotations: &[Annotation]) -> Result<String> {
    let mut s = String::new();
    for (index, a) in annotations.iter().enumerate() {
        if a.bbox.space != CoordSpace::Normalized {
            return Err(Error::NotNormalized { index });
        }
        let class = a.class_id.map_or(UNKNOWN_CLASS, |c| c as i64);
        let b = &a.bbox;
        write!(s, "{class} {:.6} {:.6} {:.6} {:.6}", b.cx, b.cy, b.w, b.h).unwrap();
        if let Some(c) = a.confidence {
            write!(s, " {c:.6}").unwrap();
        }
        s.push('\n');
    }
    Ok(s)
}
