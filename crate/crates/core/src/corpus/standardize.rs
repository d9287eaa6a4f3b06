use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{ControlKind, RawAnnotation};
use crate::error::{Error, Result};

pub const DEFAULT_HUMAN_FLOOR: f64 = 50.0;
pub const DEFAULT_DEGRADED_CEILING: f64 = 50.0;
pub const DEFAULT_MIN_ANNOTATIONS: usize = 15;

#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    /// System rows of the retained annotators; control rows are dropped.
    pub kept: Vec<RawAnnotation>,
    pub removed_annotators: Vec<String>,
    pub warnings: Vec<String>,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Drops every row of annotators who under-score human controls or
/// over-score degraded controls.
///
/// An annotator is rejected when the mean of their `human` control scores is
/// below `human_floor` or the mean of their `degraded` control scores is
/// above `degraded_ceiling`. Annotators without any control item are kept
/// and reported in `warnings`.
pub fn filter_annotators(
    annotations: &[RawAnnotation],
    human_floor: f64,
    degraded_ceiling: f64,
) -> Result<FilterOutcome> {
    let in_range = |x: f64| (0.0..=100.0).contains(&x);
    if !in_range(human_floor) || !in_range(degraded_ceiling) {
        return Err(Error::InvalidArgument(
            "control thresholds must lie in [0, 100]".into(),
        ));
    }
    if human_floor < degraded_ceiling {
        return Err(Error::InvalidArgument(format!(
            "human floor {human_floor} is below degraded ceiling {degraded_ceiling}"
        )));
    }

    let mut human: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut degraded: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut annotators = BTreeSet::new();
    for a in annotations {
        annotators.insert(a.annotator_id.as_str());
        match a.control {
            ControlKind::Human => human.entry(&a.annotator_id).or_default().push(a.raw_score),
            ControlKind::Degraded => degraded
                .entry(&a.annotator_id)
                .or_default()
                .push(a.raw_score),
            ControlKind::System => {}
        }
    }

    let mut removed = BTreeSet::new();
    let mut warnings = Vec::new();
    for id in &annotators {
        let h = human.get(id).and_then(|v| mean(v));
        let d = degraded.get(id).and_then(|v| mean(v));
        if h.is_none() && d.is_none() {
            warnings.push(format!("annotator {id} has no control items; kept unfiltered"));
            continue;
        }
        if h.is_some_and(|m| m < human_floor) || d.is_some_and(|m| m > degraded_ceiling) {
            removed.insert(*id);
        }
    }

    let kept = annotations
        .iter()
        .filter(|a| a.control == ControlKind::System && !removed.contains(a.annotator_id.as_str()))
        .cloned()
        .collect();
    Ok(FilterOutcome {
        kept,
        removed_annotators: removed.into_iter().map(str::to_string).collect(),
        warnings,
    })
}

/// Z-scores using the sample mean and the sample (n - 1) standard deviation.
/// Returns `None` when fewer than two values are given or all are equal.
pub fn zscores(values: &[f64]) -> Option<Vec<f64>> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values)?;
    let var = values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    let sd = var.sqrt();
    if sd == 0.0 || !sd.is_finite() {
        return None;
    }
    Some(values.iter().map(|x| (x - m) / sd).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssessmentMode {
    /// One annotation per caption.
    Sa,
    /// Many annotations per caption, averaged after standardization.
    Ma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StandardizeOptions {
    pub mode: AssessmentMode,
    pub min_annotations: usize,
    /// Accept MA entries below `min_annotations` instead of failing.
    pub relax_min_annotations: bool,
}

impl StandardizeOptions {
    pub fn new(mode: AssessmentMode) -> Self {
        StandardizeOptions {
            mode,
            min_annotations: DEFAULT_MIN_ANNOTATIONS,
            relax_min_annotations: false,
        }
    }
}

/// Standardized human scores per `(video, system)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AssessmentMatrix {
    entries: BTreeMap<(String, String), f64>,
    annotation_counts: BTreeMap<(String, String), usize>,
    warnings: Vec<String>,
}

impl AssessmentMatrix {
    /// Matrix from ready-made scores, each counted as one annotation.
    pub fn from_entries(entries: BTreeMap<(String, String), f64>) -> Self {
        let annotation_counts = entries.keys().map(|k| (k.clone(), 1)).collect();
        AssessmentMatrix {
            entries,
            annotation_counts,
            warnings: Vec::new(),
        }
    }

    pub fn get(&self, video_id: &str, system_id: &str) -> Option<f64> {
        self.entries
            .get(&(video_id.to_string(), system_id.to_string()))
            .copied()
    }

    pub fn entries(&self) -> &BTreeMap<(String, String), f64> {
        &self.entries
    }

    pub fn annotation_counts(&self) -> &BTreeMap<(String, String), usize> {
        &self.annotation_counts
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries whose key satisfies `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(&str, &str) -> bool) -> AssessmentMatrix {
        let entries = self
            .entries
            .iter()
            .filter(|((v, s), _)| keep(v, s))
            .map(|(k, x)| (k.clone(), *x))
            .collect();
        let annotation_counts = self
            .annotation_counts
            .iter()
            .filter(|((v, s), _)| keep(v, s))
            .map(|(k, x)| (k.clone(), *x))
            .collect();
        AssessmentMatrix {
            entries,
            annotation_counts,
            warnings: self.warnings.clone(),
        }
    }
}

/// Standardizes each annotator's scores and aggregates them per caption.
///
/// Control rows are ignored. Annotators whose scores have no spread get
/// z-scores of 0 and a warning.
pub fn standardize(
    annotations: &[RawAnnotation],
    options: &StandardizeOptions,
) -> Result<AssessmentMatrix> {
    let mut by_annotator: BTreeMap<&str, Vec<&RawAnnotation>> = BTreeMap::new();
    for a in annotations.iter().filter(|a| a.control == ControlKind::System) {
        by_annotator.entry(&a.annotator_id).or_default().push(a);
    }

    let mut warnings = Vec::new();
    let mut per_caption: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for (annotator, rows) in by_annotator {
        let raw: Vec<f64> = rows.iter().map(|a| a.raw_score).collect();
        let z = zscores(&raw).unwrap_or_else(|| {
            warnings.push(format!(
                "annotator {annotator} has no score variance over {} items; z-scores set to 0",
                raw.len()
            ));
            vec![0.0; raw.len()]
        });
        for (a, z) in rows.iter().zip(z) {
            per_caption
                .entry((a.video_id.clone(), a.system_id.clone()))
                .or_default()
                .push(z);
        }
    }

    let mut entries = BTreeMap::new();
    let mut annotation_counts = BTreeMap::new();
    let mut below_min = 0usize;
    for (key, zs) in per_caption {
        let count = zs.len();
        match options.mode {
            AssessmentMode::Sa if count != 1 => {
                return Err(Error::InvalidArgument(format!(
                    "single-annotator mode expects one annotation for ({}, {}), found {count}",
                    key.0, key.1
                )));
            }
            AssessmentMode::Ma if count < options.min_annotations => {
                if !options.relax_min_annotations {
                    return Err(Error::TooFewAnnotations {
                        video: key.0,
                        system: key.1,
                        count,
                        min: options.min_annotations,
                    });
                }
                below_min += 1;
            }
            _ => {}
        }
        entries.insert(key.clone(), zs.iter().sum::<f64>() / count as f64);
        annotation_counts.insert(key, count);
    }
    if below_min > 0 {
        warnings.push(format!(
            "{below_min} captions have fewer than {} annotations (minimum relaxed)",
            options.min_annotations
        ));
    }

    Ok(AssessmentMatrix {
        entries,
        annotation_counts,
        warnings,
    })
}
