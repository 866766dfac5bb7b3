//! Detection (IoU matching, AP, mAP@0.5) and classification (accuracy,
//! confusion matrix) scoring.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Annotation, BBox, ClassId};

pub const MAP_IOU: f64 = 0.5;

/// Intersection over union; 0 for disjoint boxes.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection_area(b);
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub image_id: String,
    pub bbox: BBox,
    pub class_id: ClassId,
    pub confidence: f64,
}

impl Detection {
    pub fn new(image_id: impl Into<String>, bbox: BBox, class_id: ClassId, confidence: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::InvalidArgument(format!("confidence {confidence} outside [0,1]")));
        }
        Ok(Detection { image_id: image_id.into(), bbox, class_id, confidence })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub image_id: String,
    pub bbox: BBox,
    pub class_id: ClassId,
}

impl GroundTruth {
    pub fn new(image_id: impl Into<String>, bbox: BBox, class_id: ClassId) -> Self {
        GroundTruth { image_id: image_id.into(), bbox, class_id }
    }
}

/// Converts one image's detection label lines (6-field, with confidence).
pub fn detections_from_annotations(image_id: &str, anns: &[Annotation]) -> Result<Vec<Detection>> {
    anns.iter()
        .enumerate()
        .map(|(i, a)| {
            let class = a.class_id.ok_or(Error::UnknownClass { index: i })?;
            let conf = a
                .confidence
                .ok_or_else(|| Error::InvalidArgument(format!("{image_id}: detection {i} has no confidence")))?;
            Detection::new(image_id, a.bbox, class, conf)
        })
        .collect()
}

pub fn ground_truth_from_annotations(image_id: &str, anns: &[Annotation]) -> Result<Vec<GroundTruth>> {
    anns.iter()
        .enumerate()
        .map(|(i, a)| {
            let class = a.class_id.ok_or(Error::UnknownClass { index: i })?;
            Ok(GroundTruth::new(image_id, a.bbox, class))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// Detection indices by descending confidence (ties by input order).
    pub order: Vec<usize>,
    /// True-positive flag for each entry of `order`.
    pub is_tp: Vec<bool>,
    /// Matched ground-truth index for each detection, in input order.
    pub matched_gt: Vec<Option<usize>>,
}

/// Greedy matching: each detection, in confidence order, takes the
/// unmatched same-image same-class ground truth with the highest IoU, if
/// that IoU reaches `iou_thr`.
pub fn match_detections(dets: &[Detection], gts: &[GroundTruth], iou_thr: f64) -> MatchResult {
    let order = confidence_order(dets);
    let mut by_key: HashMap<(&str, ClassId), Vec<usize>> = HashMap::new();
    for (i, g) in gts.iter().enumerate() {
        by_key.entry((g.image_id.as_str(), g.class_id)).or_default().push(i);
    }
    let mut taken = vec![false; gts.len()];
    let mut matched_gt = vec![None; dets.len()];
    let mut is_tp = Vec::with_capacity(dets.len());
    for &d in &order {
        let det = &dets[d];
        let mut best: Option<(usize, f64)> = None;
        if let Some(cands) = by_key.get(&(det.image_id.as_str(), det.class_id)) {
            for &g in cands {
                if taken[g] {
                    continue;
                }
                let v = iou(&det.bbox, &gts[g].bbox);
                if v >= iou_thr && best.is_none_or(|(_, b)| v > b) {
                    best = Some((g, v));
                }
            }
        }
        if let Some((g, _)) = best {
            taken[g] = true;
            matched_gt[d] = Some(g);
        }
        is_tp.push(best.is_some());
    }
    MatchResult { order, is_tp, matched_gt }
}

fn confidence_order(dets: &[Detection]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].confidence.partial_cmp(&dets[a].confidence).unwrap_or(Ordering::Equal));
    order
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApMethod {
    /// Area under the monotone precision envelope.
    #[default]
    AllPoint,
    /// Mean envelope precision at recall 0, 0.1, …, 1.
    ElevenPoint,
}

/// Precision and recall after each detection of a confidence-ordered
/// TP/FP sequence.
pub fn pr_curve(is_tp: &[bool], n_ground_truth: usize) -> (Vec<f64>, Vec<f64>) {
    let mut precision = Vec::with_capacity(is_tp.len());
    let mut recall = Vec::with_capacity(is_tp.len());
    let mut tp = 0usize;
    for (k, &hit) in is_tp.iter().enumerate() {
        tp += hit as usize;
        precision.push(tp as f64 / (k + 1) as f64);
        recall.push(if n_ground_truth == 0 { 0.0 } else { tp as f64 / n_ground_truth as f64 });
    }
    (precision, recall)
}

pub fn average_precision(is_tp: &[bool], n_ground_truth: usize, method: ApMethod) -> f64 {
    if n_ground_truth == 0 || is_tp.is_empty() {
        return 0.0;
    }
    let (precision, recall) = pr_curve(is_tp, n_ground_truth);
    let mut envelope = precision;
    for k in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[k] = envelope[k].max(envelope[k + 1]);
    }
    match method {
        ApMethod::AllPoint => {
            let mut ap = 0.0;
            let mut prev_recall = 0.0;
            for (k, &hit) in is_tp.iter().enumerate() {
                if hit {
                    ap += (recall[k] - prev_recall) * envelope[k];
                    prev_recall = recall[k];
                }
            }
            ap
        }
        ApMethod::ElevenPoint => {
            let mut sum = 0.0;
            for i in 0..=10 {
                let r = i as f64 / 10.0;
                let p = recall
                    .iter()
                    .zip(&envelope)
                    .filter(|(&rk, _)| rk >= r - 1e-12)
                    .map(|(_, &p)| p)
                    .fold(0.0, f64::max);
                sum += p;
            }
            sum / 11.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub class_id: ClassId,
    pub name: String,
    pub n_ground_truth: usize,
    pub true_positives: usize,
    pub false_positives: usize,
    pub ap: f64,
    /// False when the class has no ground truth and so is left out of mAP.
    pub in_map: bool,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalResult {
    pub class_names: Vec<String>,
    /// Per-class AP (detection mode); classes without ground truth report 0.
    pub per_class_ap: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map50: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    /// Rows are truth, columns prediction (classification mode).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confusion: Option<Vec<Vec<usize>>>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub classes: Vec<ClassScore>,
}

impl EvalResult {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("eval result serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if let Some(m) = self.map50 {
            writeln!(s, "{:<12} {:>8} {:>6} {:>6} {:>6}", "class", "AP50", "GT", "TP", "FP").unwrap();
            for c in &self.classes {
                let ap = if c.in_map { format!("{:.4}", c.ap) } else { "-".into() };
                writeln!(
                    s,
                    "{:<12} {:>8} {:>6} {:>6} {:>6}",
                    c.name, ap, c.n_ground_truth, c.true_positives, c.false_positives
                )
                .unwrap();
            }
            writeln!(s, "mAP50 {m:.4}").unwrap();
        }
        if let Some(acc) = self.accuracy {
            if let Some(conf) = &self.confusion {
                let w = self.class_names.iter().map(|n| n.len()).max().unwrap_or(4).max(6);
                write!(s, "{:<w$}", "truth\\pred").unwrap();
                for n in &self.class_names {
                    write!(s, " {n:>w$}").unwrap();
                }
                s.push('\n');
                for (n, row) in self.class_names.iter().zip(conf) {
                    write!(s, "{n:<w$}").unwrap();
                    for v in row {
                        write!(s, " {v:>w$}").unwrap();
                    }
                    s.push('\n');
                }
            }
            writeln!(s, "accuracy {acc:.4}").unwrap();
        }
        s
    }
}

/// mAP at IoU 0.5 with all-point interpolation.
pub fn map50(dets: &[Detection], gts: &[GroundTruth], class_names: &[String]) -> Result<EvalResult> {
    evaluate_detections(dets, gts, class_names, MAP_IOU, ApMethod::AllPoint)
}

pub fn evaluate_detections(
    dets: &[Detection],
    gts: &[GroundTruth],
    class_names: &[String],
    iou_thr: f64,
    method: ApMethod,
) -> Result<EvalResult> {
    let k = class_names.len();
    if let Some(d) = dets.iter().find(|d| d.class_id >= k) {
        return Err(Error::InvalidArgument(format!("detection class {} outside vocabulary of {k}", d.class_id)));
    }
    if let Some(g) = gts.iter().find(|g| g.class_id >= k) {
        return Err(Error::InvalidArgument(format!("ground-truth class {} outside vocabulary of {k}", g.class_id)));
    }
    if gts.is_empty() {
        return Err(Error::InvalidArgument("no ground truth to evaluate against".into()));
    }

    let m = match_detections(dets, gts, iou_thr);
    let mut classes = Vec::with_capacity(k);
    for (c, name) in class_names.iter().enumerate() {
        let n_gt = gts.iter().filter(|g| g.class_id == c).count();
        let seq: Vec<bool> =
            m.order.iter().zip(&m.is_tp).filter(|(&d, _)| dets[d].class_id == c).map(|(_, &tp)| tp).collect();
        let tp = seq.iter().filter(|&&t| t).count();
        let (precision, recall) = pr_curve(&seq, n_gt);
        classes.push(ClassScore {
            class_id: c,
            name: name.clone(),
            n_ground_truth: n_gt,
            true_positives: tp,
            false_positives: seq.len() - tp,
            ap: average_precision(&seq, n_gt, method),
            in_map: n_gt > 0,
            precision,
            recall,
        });
    }
    let scored: Vec<f64> = classes.iter().filter(|c| c.in_map).map(|c| c.ap).collect();
    let map = scored.iter().sum::<f64>() / scored.len() as f64;
    Ok(EvalResult {
        class_names: class_names.to_vec(),
        per_class_ap: classes.iter().map(|c| c.ap).collect(),
        map50: Some(map),
        accuracy: None,
        confusion: None,
        classes,
    })
}

pub fn classification_metrics(pred: &[ClassId], truth: &[ClassId], class_names: &[String]) -> Result<EvalResult> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!("{} predictions for {} labels", pred.len(), truth.len())));
    }
    let k = class_names.len();
    let mut confusion = vec![vec![0usize; k]; k];
    for (i, (&p, &t)) in pred.iter().zip(truth).enumerate() {
        if p >= k || t >= k {
            return Err(Error::InvalidArgument(format!("sample {i}: label outside 0..{k}")));
        }
        confusion[t][p] += 1;
    }
    let total = pred.len();
    let diag: usize = (0..k).map(|i| confusion[i][i]).sum();
    let accuracy = if total > 0 { diag as f64 / total as f64 } else { 0.0 };
    Ok(EvalResult {
        class_names: class_names.to_vec(),
        accuracy: Some(accuracy),
        confusion: Some(confusion),
        ..Default::default()
    })
}
