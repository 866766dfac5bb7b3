//! Exhaustive mAP check against an exact brute-force oracle.
//!
//! Ground truth sits at two slots, A and B. Detections land on A (IoU 1),
//! on A shifted by 12 px (IoU 1/4 with A) or on B. Every multiset of up to
//! four ground truths over {A, B} × {class 0, class 1} is paired with every
//! sequence of up to six detections over {A, A+12, B} × {class 0, class 1}.

use holoalign_core::eval::{map50, Detection, GroundTruth};
use holoalign_core::model::BBox;
use num_rational::Ratio;

use crate::Outcome;

type Q = Ratio<i64>;

const SLOTS: [(f64, f64); 3] = [(50.0, 50.0), (62.0, 50.0), (150.0, 50.0)];
const GT_SLOTS: [usize; 2] = [0, 2];

/// Exact IoU of two 20×20 boxes at the given slots.
fn slot_iou(a: usize, b: usize) -> Q {
    match (a.min(b), a.max(b)) {
        (x, y) if x == y => Q::from_integer(1),
        (0, 1) => Q::new(160, 640),
        _ => Q::from_integer(0),
    }
}

fn confidence(i: usize) -> f64 {
    ((i * 5) % 7 + 1) as f64 / 8.0
}

fn oracle(gts: &[(usize, usize)], dets: &[(usize, usize)]) -> Q {
    let half = Q::new(1, 2);
    let mut aps = Vec::new();
    for class in 0..2 {
        let n_gt = gts.iter().filter(|g| g.1 == class).count() as i64;
        if n_gt == 0 {
            continue;
        }
        let mut ranked: Vec<usize> = (0..dets.len()).filter(|&i| dets[i].1 == class).collect();
        ranked.sort_by(|&a, &b| confidence(b).partial_cmp(&confidence(a)).unwrap());
        let mut used = vec![false; gts.len()];
        let mut tp_flags = Vec::new();
        for &d in &ranked {
            let mut best: Option<(usize, Q)> = None;
            for (g, gt) in gts.iter().enumerate() {
                if used[g] || gt.1 != class {
                    continue;
                }
                let v = slot_iou(dets[d].0, gt.0);
                if v >= half && best.as_ref().is_none_or(|(_, b)| v > *b) {
                    best = Some((g, v));
                }
            }
            if let Some((g, _)) = best {
                used[g] = true;
            }
            tp_flags.push(best.is_some());
        }
        let mut precisions = Vec::new();
        let mut tp = 0;
        for (k, &hit) in tp_flags.iter().enumerate() {
            tp += hit as i64;
            precisions.push(Q::new(tp, k as i64 + 1));
        }
        let mut ap = Q::from_integer(0);
        for (k, &hit) in tp_flags.iter().enumerate() {
            if hit {
                let best_after = precisions[k..].iter().max().copied().unwrap();
                ap += best_after / Q::from_integer(n_gt);
            }
        }
        aps.push(ap);
    }
    aps.iter().copied().sum::<Q>() / Q::from_integer(aps.len() as i64)
}

fn to_f64(q: Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

fn bbox(slot: usize) -> BBox {
    let (cx, cy) = SLOTS[slot];
    BBox::pixel(cx, cy, 20.0, 20.0).unwrap()
}

fn gt_multisets() -> Vec<Vec<(usize, usize)>> {
    let kinds: Vec<(usize, usize)> = GT_SLOTS.iter().flat_map(|&s| [(s, 0), (s, 1)]).collect();
    let mut out = Vec::new();
    fn grow(kinds: &[(usize, usize)], from: usize, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if cur.len() == 4 {
            return;
        }
        for k in from..kinds.len() {
            cur.push(kinds[k]);
            grow(kinds, k, cur, out);
            cur.pop();
        }
    }
    grow(&kinds, 0, &mut Vec::new(), &mut out);
    out
}

fn det_sequences() -> Vec<Vec<(usize, usize)>> {
    let kinds: Vec<(usize, usize)> = (0..3).flat_map(|s| [(s, 0), (s, 1)]).collect();
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..6 {
        let mut next = Vec::new();
        for seq in &frontier {
            for &k in &kinds {
                let mut s: Vec<(usize, usize)> = seq.clone();
                s.push(k);
                next.push(s);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

pub fn equivalence() -> Outcome {
    let names = vec!["c0".to_string(), "c1".to_string()];
    let gt_sets = gt_multisets();
    let det_sets = det_sequences();
    let mut cases = 0usize;
    let mut worst = 0.0f64;
    let mut bit_exact = 0usize;
    for gts in &gt_sets {
        let gt_objs: Vec<GroundTruth> = gts.iter().map(|&(s, c)| GroundTruth::new("img", bbox(s), c)).collect();
        for dets in &det_sets {
            let det_objs: Vec<Detection> = dets
                .iter()
                .enumerate()
                .map(|(i, &(s, c))| Detection::new("img", bbox(s), c, confidence(i)).unwrap())
                .collect();
            let got = map50(&det_objs, &gt_objs, &names).map_err(|e| e.to_string())?.map50.unwrap();
            let want = to_f64(oracle(gts, dets));
            let diff = (got - want).abs();
            worst = worst.max(diff);
            bit_exact += (got == want) as usize;
            ensure!(diff <= 1e-12, "gts {gts:?} dets {dets:?}: map50 {got} vs oracle {want}");
            cases += 1;
        }
    }

    let gts: Vec<GroundTruth> = (0..4).map(|i| GroundTruth::new("img", bbox(GT_SLOTS[i % 2]), i / 2)).collect();
    let perfect: Vec<Detection> = gts.iter().map(|g| Detection::new("img", g.bbox, g.class_id, 0.9).unwrap()).collect();
    let p = map50(&perfect, &gts, &names).map_err(|e| e.to_string())?.map50.unwrap();
    ensure!(p == 1.0, "perfect detections give {p}");
    let e = map50(&[], &gts, &names).map_err(|e| e.to_string())?.map50.unwrap();
    ensure!(e == 0.0, "no detections give {e}");
    Ok(format!(
        "{cases} fixtures, {bit_exact} bit-identical to the exact oracle, max deviation {worst:.1e}; perfect = 1, empty = 0"
    ))
}
