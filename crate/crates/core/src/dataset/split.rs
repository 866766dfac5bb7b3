//! Greedy stratified train/validation/test splitting.
//!
//! Items are shuffled by seed, then each is placed in the split with the
//! largest instance deficit (target minus current) for the classes it holds.
//! Items are tiles or crops, so one item may carry several classes.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{ClassId, Split};

pub const DEFAULT_RATIOS: [f64; 3] = [0.70, 0.15, 0.15];

#[derive(Debug, Clone, PartialEq)]
pub struct SplitItem {
    pub id: String,
    /// Instances per class in this item.
    pub histogram: BTreeMap<ClassId, usize>,
}

impl SplitItem {
    pub fn new(id: impl Into<String>, histogram: impl IntoIterator<Item = (ClassId, usize)>) -> Self {
        SplitItem { id: id.into(), histogram: histogram.into_iter().filter(|&(_, n)| n > 0).collect() }
    }

    pub fn single(id: impl Into<String>, class: ClassId) -> Self {
        SplitItem::new(id, [(class, 1)])
    }
}

/// Item id → split. Every item appears exactly once.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SplitAssignment(pub BTreeMap<String, Split>);

impl SplitAssignment {
    pub fn get(&self, id: &str) -> Option<Split> {
        self.0.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sizes(&self) -> [usize; 3] {
        let mut s = [0; 3];
        for split in self.0.values() {
            s[split.index()] += 1;
        }
        s
    }

    /// `id<TAB>SPLIT` lines, sorted by id.
    pub fn to_text(&self) -> String {
        self.0.iter().map(|(id, s)| format!("{id}\t{s}\n")).collect()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (id, split) = line
                .rsplit_once(char::is_whitespace)
                .ok_or_else(|| Error::InvalidSplit(format!("line {}: expected `id SPLIT`", n + 1)))?;
            let split: Split = split.parse()?;
            if map.insert(id.trim().to_string(), split).is_some() {
                return Err(Error::InvalidSplit(format!("line {}: duplicate id {id:?}", n + 1)));
            }
        }
        Ok(SplitAssignment(map))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SplitAssignment::from_text(&text)
    }
}

#[derive(Debug, Clone)]
pub struct SplitOutcome {
    pub assignment: SplitAssignment,
    /// Instance counts per class and split, `[class] -> [train, val, test]`.
    pub class_counts: BTreeMap<ClassId, [usize; 3]>,
    pub warnings: Vec<String>,
}

pub fn validate_ratios(ratios: [f64; 3]) -> Result<()> {
    if ratios.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::InvalidSplit(format!("ratios must be non-negative, got {ratios:?}")));
    }
    let sum: f64 = ratios.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidSplit(format!("ratios sum to {sum}, not 1")));
    }
    Ok(())
}

pub fn split_dataset(items: &[SplitItem], ratios: [f64; 3], seed: u64) -> Result<SplitOutcome> {
    validate_ratios(ratios)?;
    if items.is_empty() {
        return Err(Error::InvalidSplit("no items to split".into()));
    }
    let mut ids = HashSet::new();
    if let Some(dup) = items.iter().find(|it| !ids.insert(it.id.as_str())) {
        return Err(Error::InvalidSplit(format!("duplicate item id {:?}", dup.id)));
    }

    let mut totals: BTreeMap<ClassId, usize> = BTreeMap::new();
    let mut holders: BTreeMap<ClassId, usize> = BTreeMap::new();
    for it in items {
        for (&c, &n) in &it.histogram {
            *totals.entry(c).or_default() += n;
            *holders.entry(c).or_default() += 1;
        }
    }
    let active_splits = ratios.iter().filter(|&&r| r > 0.0).count();
    let mut warnings = Vec::new();
    for (&c, &h) in &holders {
        if h < active_splits {
            let msg = format!("class {c} occurs in only {h} item(s); stratification is best-effort");
            warn!("{msg}");
            warnings.push(msg);
        }
    }

    let targets: BTreeMap<ClassId, [f64; 3]> =
        totals.iter().map(|(&c, &n)| (c, ratios.map(|r| r * n as f64))).collect();
    let mut current: BTreeMap<ClassId, [usize; 3]> = totals.keys().map(|&c| (c, [0; 3])).collect();
    let total_items = items.len() as f64;
    let item_targets = ratios.map(|r| r * total_items);
    let mut item_counts = [0usize; 3];

    let mut order: Vec<usize> = (0..items.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut assignment = BTreeMap::new();
    for idx in order {
        let item = &items[idx];
        let mut best: Option<(usize, f64)> = None;
        for s in 0..3 {
            if ratios[s] == 0.0 {
                continue;
            }
            // Instance deficit for the item's classes; empty items follow the
            // item-count deficit instead.
            let score = if item.histogram.is_empty() {
                item_targets[s] - item_counts[s] as f64
            } else {
                item.histogram.iter().map(|(c, &n)| n as f64 * (targets[c][s] - current[c][s] as f64)).sum()
            };
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((s, score));
            }
        }
        let (s, _) = best.expect("at least one split has a positive ratio");
        for (c, &n) in &item.histogram {
            current.get_mut(c).expect("class seen")[s] += n;
        }
        item_counts[s] += 1;
        assignment.insert(item.id.clone(), Split::ALL[s]);
    }

    Ok(SplitOutcome { assignment: SplitAssignment(assignment), class_counts: current, warnings })
}
