use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{ClassId, DatasetManifest, LabelSource, Split};

/// Instance counts keyed by class, label source and (optional) split.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InstanceCounts {
    pub class_names: Vec<String>,
    counts: BTreeMap<(ClassId, LabelSource, Option<Split>), usize>,
    /// Annotations still carrying the UNKNOWN class, by source.
    pub unassigned: BTreeMap<LabelSource, usize>,
}

impl InstanceCounts {
    pub fn new(class_names: Vec<String>) -> Self {
        InstanceCounts { class_names, ..Default::default() }
    }

    pub fn add(&mut self, class: ClassId, source: LabelSource, split: Option<Split>, n: usize) {
        *self.counts.entry((class, source, split)).or_default() += n;
    }

    pub fn get(&self, class: ClassId, source: LabelSource, split: Option<Split>) -> usize {
        self.counts.get(&(class, source, split)).copied().unwrap_or(0)
    }

    /// Count for a class and source across all splits (and unsplit records).
    pub fn class_total(&self, class: ClassId, source: LabelSource) -> usize {
        self.counts.iter().filter(|((c, s, _), _)| *c == class && *s == source).map(|(_, n)| n).sum()
    }

    pub fn split_total(&self, source: LabelSource, split: Split) -> usize {
        self.counts.iter().filter(|((_, s, sp), _)| *s == source && *sp == Some(split)).map(|(_, n)| n).sum()
    }

    pub fn source_total(&self, source: LabelSource) -> usize {
        (0..self.class_names.len()).map(|c| self.class_total(c, source)).sum()
    }

    /// Per-class totals for a source, in class order.
    pub fn per_class(&self, source: LabelSource) -> Vec<usize> {
        (0..self.class_names.len()).map(|c| self.class_total(c, source)).collect()
    }
}

/// Counts annotated instances by class × source × split.
pub fn count_instances(manifest: &DatasetManifest) -> InstanceCounts {
    let mut counts = InstanceCounts::new(manifest.class_names.clone());
    for record in &manifest.records {
        let split = manifest.split_of(record);
        for a in &record.annotations {
            match a.class_id {
                Some(c) => counts.add(c, a.source, split, 1),
                None => *counts.unassigned.entry(a.source).or_default() += 1,
            }
        }
    }
    counts
}

/// Per-class loss weights, `N / (K · n_c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassWeightTable {
    pub weights: Vec<f64>,
}

pub fn class_weights(counts: &[usize]) -> Result<ClassWeightTable> {
    if counts.is_empty() {
        return Err(Error::InvalidArgument("no classes to weight".into()));
    }
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(Error::ZeroCount(c.to_string()));
    }
    let total: usize = counts.iter().sum();
    let k = counts.len() as f64;
    let weights = counts.iter().map(|&n| total as f64 / (k * n as f64)).collect();
    Ok(ClassWeightTable { weights })
}
