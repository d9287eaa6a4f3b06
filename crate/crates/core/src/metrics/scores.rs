use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::io::{parse_jsonl, read, to_jsonl, write};
use crate::error::{Error, Result};

pub(crate) const SCORES: &str = "scores.jsonl";

/// Identifies one score: a caption, optionally against a single reference.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ScoreKey {
    pub video_id: String,
    /// `None` when the score was computed against all references at once.
    pub ref_id: Option<String>,
    pub system_id: String,
}

impl ScoreKey {
    pub fn new(video_id: &str, ref_id: Option<&str>, system_id: &str) -> Self {
        ScoreKey {
            video_id: video_id.to_string(),
            ref_id: ref_id.map(str::to_string),
            system_id: system_id.to_string(),
        }
    }

    pub fn caption(&self) -> (String, String) {
        (self.video_id.clone(), self.system_id.clone())
    }
}

/// One line of `scores.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricScore {
    pub metric: String,
    pub video_id: String,
    pub ref_id: Option<String>,
    pub system_id: String,
    pub score: f64,
}

/// Scores of one metric, keyed by `(video, reference?, system)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreMatrix {
    metric: String,
    entries: BTreeMap<ScoreKey, f64>,
}

impl ScoreMatrix {
    pub fn new(metric: impl Into<String>) -> Self {
        ScoreMatrix {
            metric: metric.into(),
            entries: BTreeMap::new(),
        }
    }

    pub fn metric(&self) -> &str {
        &self.metric
    }

    pub fn insert(&mut self, key: ScoreKey, score: f64) -> Option<f64> {
        self.entries.insert(key, score)
    }

    pub fn get(&self, key: &ScoreKey) -> Option<f64> {
        self.entries.get(key).copied()
    }

    pub fn entries(&self) -> &BTreeMap<ScoreKey, f64> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Same keys, every score transformed by `f`.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> ScoreMatrix {
        ScoreMatrix {
            metric: self.metric.clone(),
            entries: self.entries.iter().map(|(k, v)| (k.clone(), f(*v))).collect(),
        }
    }

    /// Mean score per `(video, system)` over its reference rows.
    pub fn caption_means(&self) -> BTreeMap<(String, String), f64> {
        let mut acc: BTreeMap<(String, String), (f64, usize)> = BTreeMap::new();
        for (k, v) in &self.entries {
            let e = acc.entry(k.caption()).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
        acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
    }

    /// Only the rows scored against `ref_id`.
    pub fn for_reference(&self, ref_id: &str) -> ScoreMatrix {
        ScoreMatrix {
            metric: self.metric.clone(),
            entries: self
                .entries
                .iter()
                .filter(|(k, _)| k.ref_id.as_deref() == Some(ref_id))
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
        }
    }

    /// Rows accepted by `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(&ScoreKey) -> bool) -> ScoreMatrix {
        ScoreMatrix {
            metric: self.metric.clone(),
            entries: self
                .entries
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
        }
    }

    pub fn records(&self) -> Vec<MetricScore> {
        self.entries
            .iter()
            .map(|(k, v)| MetricScore {
                metric: self.metric.clone(),
                video_id: k.video_id.clone(),
                ref_id: k.ref_id.clone(),
                system_id: k.system_id.clone(),
                score: *v,
            })
            .collect()
    }
}

/// Groups `scores.jsonl` rows by metric, rejecting duplicate keys and
/// non-finite scores.
pub fn parse_scores(text: &str) -> Result<BTreeMap<String, ScoreMatrix>> {
    let rows: Vec<(usize, MetricScore)> = parse_jsonl(text, SCORES)?;
    let mut out: BTreeMap<String, ScoreMatrix> = BTreeMap::new();
    for (line, r) in rows {
        if !r.score.is_finite() {
            return Err(Error::Parse {
                file: SCORES.into(),
                line,
                message: format!("non-finite score {}", r.score),
            });
        }
        let m = out
            .entry(r.metric.clone())
            .or_insert_with(|| ScoreMatrix::new(r.metric.clone()));
        let key = ScoreKey {
            video_id: r.video_id,
            ref_id: r.ref_id,
            system_id: r.system_id,
        };
        if m.entries.contains_key(&key) {
            return Err(Error::DuplicateKey {
                file: SCORES.into(),
                line,
                key: format!(
                    "({}, {}, {}, {})",
                    r.metric,
                    key.video_id,
                    key.ref_id.as_deref().unwrap_or("null"),
                    key.system_id
                ),
            });
        }
        m.entries.insert(key, r.score);
    }
    Ok(out)
}

pub fn read_scores(path: &Path) -> Result<BTreeMap<String, ScoreMatrix>> {
    parse_scores(&read(path)?)
}

pub fn scores_to_jsonl(matrices: &[ScoreMatrix]) -> String {
    let records: Vec<MetricScore> = matrices.iter().flat_map(ScoreMatrix::records).collect();
    to_jsonl(&records)
}

pub fn write_scores(path: &Path, matrices: &[ScoreMatrix]) -> Result<()> {
    write(path, &scores_to_jsonl(matrices))
}
