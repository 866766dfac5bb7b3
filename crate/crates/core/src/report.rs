//! Dataset arithmetic and summary tables: expansion factors, instance and
//! split tables, and before/after metric ratios.

use std::fmt;

use serde::Serialize;

use crate::dataset::InstanceCounts;
use crate::error::{Error, Result};
use crate::eval::EvalResult;
use crate::model::{LabelSource, Split};

/// Rounds half away from zero at two decimals.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FactorReport {
    pub baseline: usize,
    pub expanded: usize,
    pub factor: f64,
}

impl FactorReport {
    pub fn display_factor(&self) -> f64 {
        round2(self.factor)
    }
}

impl fmt::Display for FactorReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}: x{:.2}", self.baseline, self.expanded, self.display_factor())
    }
}

pub fn expansion_factor(baseline: usize, expanded: usize) -> Result<FactorReport> {
    if baseline == 0 {
        return Err(Error::ZeroDenominator("baseline count is zero".into()));
    }
    Ok(FactorReport { baseline, expanded, factor: expanded as f64 / baseline as f64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Improvement,
    Degradation,
    Unchanged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioReport {
    pub before: f64,
    pub after: f64,
    /// Larger over smaller value, so always ≥ 1.
    pub ratio: f64,
    pub direction: Direction,
}

impl RatioReport {
    pub fn display_ratio(&self) -> f64 {
        round2(self.ratio)
    }
}

impl fmt::Display for RatioReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word = match self.direction {
            Direction::Improvement => "improvement",
            Direction::Degradation => "degradation",
            Direction::Unchanged => "unchanged",
        };
        write!(f, "{} -> {}: {:.2}x {word}", self.before, self.after, self.display_ratio())
    }
}

/// Ratio between two scores of the same metric.
pub fn compare_scores(before: f64, after: f64) -> Result<RatioReport> {
    if !(before > 0.0 && after > 0.0) || !before.is_finite() || !after.is_finite() {
        return Err(Error::ZeroDenominator(format!("scores must be positive, got {before} and {after}")));
    }
    let (ratio, direction) = match after.partial_cmp(&before).expect("finite") {
        std::cmp::Ordering::Greater => (after / before, Direction::Improvement),
        std::cmp::Ordering::Less => (before / after, Direction::Degradation),
        std::cmp::Ordering::Equal => (1.0, Direction::Unchanged),
    };
    Ok(RatioReport { before, after, ratio, direction })
}

/// Compares the mAP50 (or, for classification results, accuracy) of two runs.
pub fn compare_runs(before: &EvalResult, after: &EvalResult) -> Result<RatioReport> {
    match (before.map50, after.map50, before.accuracy, after.accuracy) {
        (Some(a), Some(b), _, _) => compare_scores(a, b),
        (None, None, Some(a), Some(b)) => compare_scores(a, b),
        _ => Err(Error::InvalidArgument("runs report different metric kinds".into())),
    }
}

fn csv_string(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn aligned(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut s = line(header.to_vec());
    s.push('\n');
    for r in rows {
        s.push_str(&line(r.iter().map(String::as_str).collect()));
        s.push('\n');
    }
    s
}

/// Instances per class, manual versus automated labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceTable {
    pub rows: Vec<(String, usize, usize)>,
    pub total_manual: usize,
    pub total_auto: usize,
}

const INSTANCE_HEADER: [&str; 3] = ["Classes", "Manual Labels", "Automated Labels"];
const SPLIT_HEADER: [&str; 5] = ["Annotation Method", "Training", "Validation", "Testing", "Total"];

impl InstanceTable {
    fn cells(&self) -> Vec<Vec<String>> {
        let mut rows: Vec<Vec<String>> =
            self.rows.iter().map(|(n, m, a)| vec![n.clone(), m.to_string(), a.to_string()]).collect();
        rows.push(vec!["Total".into(), self.total_manual.to_string(), self.total_auto.to_string()]);
        rows
    }

    pub fn to_text(&self) -> String {
        aligned(&INSTANCE_HEADER, &self.cells())
    }

    pub fn to_csv(&self) -> String {
        csv_string(&INSTANCE_HEADER, &self.cells())
    }
}

pub fn table_instances(counts: &InstanceCounts) -> InstanceTable {
    let manual = counts.per_class(LabelSource::Manual);
    let auto = counts.per_class(LabelSource::Auto);
    let rows: Vec<_> =
        counts.class_names.iter().zip(manual.iter().zip(&auto)).map(|(n, (&m, &a))| (n.clone(), m, a)).collect();
    InstanceTable { total_manual: rows.iter().map(|r| r.1).sum(), total_auto: rows.iter().map(|r| r.2).sum(), rows }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitRow {
    pub source: LabelSource,
    pub train: usize,
    pub val: usize,
    pub test: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitTable {
    pub rows: Vec<SplitRow>,
}

impl SplitTable {
    fn cells(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                let name = match r.source {
                    LabelSource::Manual => "Manual Labels",
                    LabelSource::Auto => "Automated Labels",
                };
                vec![name.into(), r.train.to_string(), r.val.to_string(), r.test.to_string(), r.total.to_string()]
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        aligned(&SPLIT_HEADER, &self.cells())
    }

    pub fn to_csv(&self) -> String {
        csv_string(&SPLIT_HEADER, &self.cells())
    }
}

/// Instances per split for each label source present. Every counted
/// instance must sit in an assigned split.
pub fn table_splits(counts: &InstanceCounts) -> Result<SplitTable> {
    let mut rows = Vec::new();
    for source in [LabelSource::Manual, LabelSource::Auto] {
        let total = counts.source_total(source);
        let per = Split::ALL.map(|s| counts.split_total(source, s));
        let assigned: usize = per.iter().sum();
        if assigned != total {
            return Err(Error::Inconsistent(format!(
                "{source:?}: {assigned} instances assigned to splits but {total} counted"
            )));
        }
        if total > 0 {
            rows.push(SplitRow { source, train: per[0], val: per[1], test: per[2], total });
        }
    }
    Ok(SplitTable { rows })
}
