//! Agreement between metric scores and human assessment.

mod shuffle;
mod williams;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{AssessmentMatrix, CaptionKey, Corpus};
use crate::error::{Error, Result};
use crate::learned::{score_pairs, BaselineScorer};
use crate::metrics::{score_all, Metric, ScoreMatrix};

pub use shuffle::{shuffle_captions, shuffle_experiment, ShuffleReport, ShuffleRow};
pub use williams::{williams_matrix, williams_test, WilliamsCell, WilliamsMatrix, WilliamsResult};

/// Fewest aligned samples for a correlation.
pub const MIN_SAMPLES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    System,
    Caption,
}

impl std::str::FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "system" => Ok(Level::System),
            "caption" => Ok(Level::Caption),
            _ => Err(Error::InvalidArgument(format!(
                "level must be system or caption, got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub level: Level,
    pub metric: String,
    pub year: Option<String>,
    pub rho: f64,
    pub n: usize,
}

/// Pearson product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            what: "correlation samples".into(),
            needed: MIN_SAMPLES,
            got: x.len(),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::UndefinedCorrelation("non-finite input".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation(
            "one of the vectors is constant".into(),
        ));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Per-system means of metric and human scores and their correlation.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemLevel {
    /// system -> (metric mean, human mean)
    pub means: BTreeMap<String, (f64, f64)>,
    pub report: CorrelationReport,
    /// Captions scored on one side only; left out of both means.
    pub missing: Vec<CaptionKey>,
}

fn coverage(
    scores: &[&ScoreMatrix],
    human: &AssessmentMatrix,
) -> (BTreeSet<CaptionKey>, Vec<CaptionKey>) {
    let mut all: BTreeSet<CaptionKey> = human.entries().keys().cloned().collect();
    let mut common = all.clone();
    for m in scores {
        let keys: BTreeSet<CaptionKey> = m.entries().keys().map(|k| k.caption()).collect();
        common.retain(|k| keys.contains(k));
        all.extend(keys);
    }
    let missing = all.difference(&common).cloned().collect();
    (common, missing)
}

/// Mean of every score row of each system over the captions in `keep`.
fn system_means(scores: &ScoreMatrix, keep: &BTreeSet<CaptionKey>) -> BTreeMap<String, f64> {
    let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for (k, v) in scores.entries() {
        if keep.contains(&k.caption()) {
            let e = acc.entry(k.system_id.clone()).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
    }
    acc.into_iter().map(|(s, (t, n))| (s, t / n as f64)).collect()
}

fn human_system_means(human: &AssessmentMatrix, keep: &BTreeSet<CaptionKey>) -> BTreeMap<String, f64> {
    let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for (k, v) in human.entries() {
        if keep.contains(k) {
            let e = acc.entry(k.1.clone()).or_insert((0.0, 0));
            e.0 += v;
            e.1 += 1;
        }
    }
    acc.into_iter().map(|(s, (t, n))| (s, t / n as f64)).collect()
}

/// Correlates per-system mean metric scores with per-system mean human
/// scores, over the captions both sides cover.
pub fn system_level(scores: &ScoreMatrix, human: &AssessmentMatrix) -> Result<SystemLevel> {
    let (common, missing) = coverage(&[scores], human);
    let p = system_means(scores, &common);
    let u = human_system_means(human, &common);
    if p.len() < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            what: format!("systems with both {} and human scores", scores.metric()),
            needed: MIN_SAMPLES,
            got: p.len(),
        });
    }
    let means: BTreeMap<String, (f64, f64)> =
        p.into_iter().map(|(s, x)| { let y = u[&s]; (s, (x, y)) }).collect();
    let (x, y): (Vec<f64>, Vec<f64>) = means.values().copied().unzip();
    let rho = pearson(&x, &y)?;
    Ok(SystemLevel {
        report: CorrelationReport {
            level: Level::System,
            metric: scores.metric().to_string(),
            year: None,
            rho,
            n: x.len(),
        },
        means,
        missing,
    })
}

/// Correlates caption scores with human scores. With `multiref` the metric
/// scores of a caption are first averaged over its references; otherwise
/// every (video, reference, system) row is a sample paired with its
/// caption's human score.
pub fn caption_level(
    scores: &ScoreMatrix,
    human: &AssessmentMatrix,
    multiref: bool,
) -> Result<CorrelationReport> {
    let (x, y) = if multiref {
        scores
            .caption_means()
            .into_iter()
            .filter_map(|((v, s), x)| human.get(&v, &s).map(|h| (x, h)))
            .unzip::<_, _, Vec<f64>, Vec<f64>>()
    } else {
        scores
            .entries()
            .iter()
            .filter_map(|(k, &x)| human.get(&k.video_id, &k.system_id).map(|h| (x, h)))
            .unzip()
    };
    let rho = pearson(&x, &y)?;
    Ok(CorrelationReport {
        level: Level::Caption,
        metric: scores.metric().to_string(),
        year: None,
        rho,
        n: x.len(),
    })
}

/// Correlation at `level`; caption level averages over references.
pub fn correlate(
    scores: &ScoreMatrix,
    human: &AssessmentMatrix,
    level: Level,
) -> Result<CorrelationReport> {
    match level {
        Level::System => system_level(scores, human).map(|s| s.report),
        Level::Caption => caption_level(scores, human, true),
    }
}

/// Metric and human vectors over a common set of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedSamples {
    /// Sample labels: system ids or `video/system`.
    pub labels: Vec<String>,
    pub metrics: Vec<(String, Vec<f64>)>,
    pub human: Vec<f64>,
    /// Captions dropped because some side lacks them.
    pub missing: Vec<CaptionKey>,
}

/// Aligns several metrics and the human scores on the captions all of them
/// cover, at system level (per-system means) or caption level (reference
/// means).
pub fn align_samples(
    scores: &[&ScoreMatrix],
    human: &AssessmentMatrix,
    level: Level,
) -> Result<AlignedSamples> {
    let (common, missing) = coverage(scores, human);
    let (labels, human_v, metrics) = match level {
        Level::System => {
            let u = human_system_means(human, &common);
            let metrics = scores
                .iter()
                .map(|m| (m.metric().to_string(), system_means(m, &common).into_values().collect()))
                .collect();
            (u.keys().cloned().collect(), u.into_values().collect(), metrics)
        }
        Level::Caption => {
            let labels = common.iter().map(|(v, s)| format!("{v}/{s}")).collect();
            let h = common.iter().map(|(v, s)| human.get(v, s).expect("covered")).collect();
            let metrics = scores
                .iter()
                .map(|m| {
                    let means = m.caption_means();
                    (m.metric().to_string(), common.iter().map(|k| means[k]).collect())
                })
                .collect();
            (labels, h, metrics)
        }
    };
    Ok(AlignedSamples {
        labels,
        metrics,
        human: human_v,
        missing,
    })
}

/// Per-year correlations of several metrics, laid out with metrics as rows
/// and years as columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    pub level: Level,
    pub years: Vec<String>,
    pub reports: Vec<CorrelationReport>,
}

impl CorrelationTable {
    pub fn metrics(&self) -> Vec<&str> {
        let mut seen = Vec::new();
        for r in &self.reports {
            if !seen.contains(&r.metric.as_str()) {
                seen.push(r.metric.as_str());
            }
        }
        seen
    }

    pub fn rho(&self, metric: &str, year: &str) -> Option<f64> {
        self.reports
            .iter()
            .find(|r| r.metric == metric && r.year.as_deref() == Some(year))
            .map(|r| r.rho)
    }

    /// Mean over all years.
    pub fn mean(&self, metric: &str) -> f64 {
        mean(self.years.iter().filter_map(|y| self.rho(metric, y)))
    }

    /// Mean over every year but the first.
    pub fn mean_excluding_first(&self, metric: &str) -> Option<f64> {
        (self.years.len() > 1).then(|| mean(self.years[1..].iter().filter_map(|y| self.rho(metric, y))))
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("metric");
        for y in &self.years {
            write!(out, "\t{y}").unwrap();
        }
        out.push_str("\tmean");
        if let Some(first) = self.years.first().filter(|_| self.years.len() > 1) {
            write!(out, "\tmean_excl_{first}").unwrap();
        }
        out.push('\n');
        for m in self.metrics() {
            out.push_str(m);
            for y in &self.years {
                write!(out, "\t{:.4}", self.rho(m, y).unwrap_or(f64::NAN)).unwrap();
            }
            write!(out, "\t{:.4}", self.mean(m)).unwrap();
            if let Some(x) = self.mean_excluding_first(m) {
                write!(out, "\t{x:.4}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

/// Correlations of every matrix in every year of `corpus`. A year where
/// some correlation is undefined is an error naming the metric and year.
pub fn correlation_table(
    corpus: &Corpus,
    scores: &[&ScoreMatrix],
    human: &AssessmentMatrix,
    level: Level,
) -> Result<CorrelationTable> {
    let years: Vec<String> = corpus.years().into_iter().map(str::to_string).collect();
    let mut reports = Vec::new();
    for m in scores {
        for year in &years {
            let in_year = |v: &str| corpus.year_of(v) == Some(year.as_str());
            let sub = m.filtered(|k| in_year(&k.video_id));
            let hum = human.filtered(|v, _| in_year(v));
            let mut r = correlate(&sub, &hum, level).map_err(|e| {
                Error::InvalidArgument(format!("{} in {year}: {e}", m.metric()))
            })?;
            r.year = Some(year.clone());
            reports.push(r);
        }
    }
    Ok(CorrelationTable {
        level,
        years,
        reports,
    })
}

/// Caption-level correlation of each reference on its own and of the
/// reference mean, laid out as one row per reference plus `combined`.
pub fn per_reference_correlations(
    scores: &ScoreMatrix,
    human: &AssessmentMatrix,
) -> Result<Vec<(String, CorrelationReport)>> {
    let refs: BTreeSet<&str> = scores
        .entries()
        .keys()
        .filter_map(|k| k.ref_id.as_deref())
        .collect();
    let mut out = Vec::new();
    for r in refs {
        out.push((r.to_string(), caption_level(&scores.for_reference(r), human, false)?));
    }
    out.push(("combined".to_string(), caption_level(scores, human, true)?));
    Ok(out)
}

/// Anything that can score every caption of a corpus.
pub trait CaptionScorer: Sync {
    fn name(&self) -> String;
    fn score_corpus(&self, corpus: &Corpus) -> Result<ScoreMatrix>;
}

impl CaptionScorer for Metric {
    fn name(&self) -> String {
        Metric::name(*self).to_string()
    }

    fn score_corpus(&self, corpus: &Corpus) -> Result<ScoreMatrix> {
        Ok(score_all(corpus, &[*self])?.0.remove(0))
    }
}

impl CaptionScorer for BaselineScorer {
    fn name(&self) -> String {
        crate::learned::BASELINE_METRIC.to_string()
    }

    fn score_corpus(&self, corpus: &Corpus) -> Result<ScoreMatrix> {
        Ok(score_pairs(self, corpus))
    }
}

/// Caption-level ρ (reference means) of a scorer, with a constant scorer
/// counted as 0: it carries no ranking information.
pub fn caption_rho_or_zero(scores: &ScoreMatrix, human: &AssessmentMatrix) -> Result<f64> {
    match caption_level(scores, human, true) {
        Ok(r) => Ok(r.rho),
        Err(Error::UndefinedCorrelation(_)) => Ok(0.0),
        Err(e) => Err(e),
    }
}
