//! Trainable pair scorer and the exchange files for external learned
//! metrics.
//!
//! The baseline scorer maps a (candidate, reference) pair to seven
//! hand-crafted overlap features and fits a ridge regression against the
//! standardized human scores, so its predictions are trained to track human
//! judgment. External scorers exchange data through `pairs.jsonl` (out) and
//! `scores.jsonl` (in).

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::io::{to_jsonl, write};
use crate::corpus::{AssessmentMatrix, Corpus};
use crate::error::{Error, Result};
use crate::linalg::{fit_ridge, ridge_objective, LinearFit};
use crate::metrics::rouge::lcs_len;
use crate::metrics::{read_scores, ScoreKey, ScoreMatrix};
use crate::textproc::{ngrams_of, stems, tokenize, TokenSequence};

pub const BASELINE_METRIC: &str = "baseline";
pub const DEFAULT_RIDGE_LAMBDA: f64 = 1e-3;
/// Upper bound of the candidate/reference length ratio feature.
pub const LENGTH_RATIO_CAP: f64 = 4.0;
pub const NUM_FEATURES: usize = 7;
pub const FEATURE_NAMES: [&str; NUM_FEATURES] = [
    "unigram_precision",
    "unigram_recall",
    "bigram_precision",
    "stem_match_rate",
    "length_ratio",
    "lcs_ratio",
    "length_difference",
];

/// Feature vector of one (candidate, reference) pair, in
/// [`FEATURE_NAMES`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairFeatures(pub [f64; NUM_FEATURES]);

impl PairFeatures {
    pub fn unigram_precision(&self) -> f64 {
        self.0[0]
    }

    pub fn unigram_recall(&self) -> f64 {
        self.0[1]
    }

    pub fn length_ratio(&self) -> f64 {
        self.0[4]
    }

    pub fn lcs_ratio(&self) -> f64 {
        self.0[5]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

fn clipped(a: &[String], b: &[String], n: usize) -> usize {
    ngrams_of(a, n).clipped_matches(&ngrams_of(b, n))
}

/// Overlap features of `candidate` against `reference`. Either side empty
/// gives the zero vector.
pub fn featurize(candidate: &TokenSequence, reference: &TokenSequence) -> PairFeatures {
    if candidate.is_empty() || reference.is_empty() {
        return PairFeatures([0.0; NUM_FEATURES]);
    }
    let (c, r) = (candidate.tokens(), reference.tokens());
    let (lc, lr) = (c.len() as f64, r.len() as f64);
    let longer = lc.max(lr);
    let unigram = clipped(c, r, 1) as f64;
    let bigram_precision = if c.len() > 1 {
        clipped(c, r, 2) as f64 / (lc - 1.0)
    } else {
        0.0
    };
    let stem_matches = clipped(&stems(candidate), &stems(reference), 1) as f64;
    PairFeatures([
        unigram / lc,
        unigram / lr,
        bigram_precision,
        stem_matches / lc,
        (lc / lr).min(LENGTH_RATIO_CAP),
        lcs_len(c, r) as f64 / longer,
        (lc - lr).abs() / longer,
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub samples: usize,
    pub ridge_lambda: f64,
    /// Ridge objective before fitting (zero weights, mean bias) and after.
    pub loss_trace: Vec<f64>,
}

/// Linear scorer `w·features + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineScorer {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub training: Option<TrainingMeta>,
}

impl BaselineScorer {
    /// Scorer with all weights zero.
    pub fn constant(bias: f64) -> Self {
        BaselineScorer {
            weights: vec![0.0; NUM_FEATURES],
            bias,
            training: None,
        }
    }

    pub fn score_features(&self, f: &PairFeatures) -> f64 {
        self.bias + self.weights.iter().zip(f.as_slice()).map(|(w, x)| w * x).sum::<f64>()
    }

    pub fn score(&self, candidate: &TokenSequence, reference: &TokenSequence) -> f64 {
        self.score_features(&featurize(candidate, reference))
    }
}

/// Fits the scorer on precomputed features.
pub fn train_on_features(
    features: &[PairFeatures],
    targets: &[f64],
    ridge_lambda: f64,
) -> Result<BaselineScorer> {
    if features.len() != targets.len() {
        return Err(Error::LengthMismatch {
            left: features.len(),
            right: targets.len(),
        });
    }
    if features.len() < NUM_FEATURES + 1 {
        return Err(Error::TooFewSamples {
            what: "training pairs".into(),
            needed: NUM_FEATURES + 1,
            got: features.len(),
        });
    }
    let rows: Vec<Vec<f64>> = features.iter().map(|f| f.0.to_vec()).collect();
    let fit = fit_ridge(&rows, targets, ridge_lambda).map_err(|e| match e {
        Error::Singular(msg) if ridge_lambda == 0.0 => {
            Error::Singular(format!("{msg}; retry with a ridge lambda > 0"))
        }
        other => other,
    })?;
    let start = LinearFit {
        weights: vec![0.0; NUM_FEATURES],
        bias: targets.iter().sum::<f64>() / targets.len() as f64,
    };
    let loss_trace = vec![
        ridge_objective(&start, &rows, targets, ridge_lambda),
        ridge_objective(&fit, &rows, targets, ridge_lambda),
    ];
    Ok(BaselineScorer {
        weights: fit.weights,
        bias: fit.bias,
        training: Some(TrainingMeta {
            samples: rows.len(),
            ridge_lambda,
            loss_trace,
        }),
    })
}

/// Closed-form ridge fit of the scorer on (candidate, reference) pairs.
pub fn train_baseline(
    pairs: &[(TokenSequence, TokenSequence)],
    targets: &[f64],
    ridge_lambda: f64,
) -> Result<BaselineScorer> {
    let features: Vec<PairFeatures> = pairs.iter().map(|(c, r)| featurize(c, r)).collect();
    train_on_features(&features, targets, ridge_lambda)
}

/// Every (candidate, reference) pair with a human score, the caption's
/// score shared by all its references.
pub fn training_pairs(
    corpus: &Corpus,
    human: &AssessmentMatrix,
) -> (Vec<(TokenSequence, TokenSequence)>, Vec<f64>) {
    let mut pairs = Vec::new();
    let mut targets = Vec::new();
    for ((v, s), caption) in corpus.candidates() {
        let Some(target) = human.get(v, s) else {
            continue;
        };
        let cand = tokenize(caption);
        for r in corpus.references(v) {
            pairs.push((cand.clone(), tokenize(&r.text)));
            targets.push(target);
        }
    }
    (pairs, targets)
}

/// One score per (video, reference, system).
pub fn score_pairs(scorer: &BaselineScorer, corpus: &Corpus) -> ScoreMatrix {
    let rows: Vec<(ScoreKey, f64)> = corpus
        .candidates()
        .collect::<Vec<_>>()
        .par_iter()
        .flat_map_iter(|((v, s), caption)| {
            let cand = tokenize(caption);
            corpus
                .references(v)
                .iter()
                .map(|r| {
                    (
                        ScoreKey::new(v, Some(&r.ref_id), s),
                        scorer.score(&cand, &tokenize(&r.text)),
                    )
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let mut m = ScoreMatrix::new(BASELINE_METRIC);
    for (k, x) in rows {
        m.insert(k, x);
    }
    m
}

/// One line of `pairs.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub video_id: String,
    pub ref_id: String,
    pub system_id: String,
    pub candidate: String,
    pub reference: String,
    pub target: Option<f64>,
    pub year: String,
}

pub fn pair_records(corpus: &Corpus, human: Option<&AssessmentMatrix>) -> Vec<PairRecord> {
    let mut out = Vec::new();
    for ((v, s), caption) in corpus.candidates() {
        let year = corpus.year_of(v).unwrap_or_default();
        for r in corpus.references(v) {
            out.push(PairRecord {
                video_id: v.clone(),
                ref_id: r.ref_id.clone(),
                system_id: s.clone(),
                candidate: caption.to_string(),
                reference: r.text.clone(),
                target: human.and_then(|h| h.get(v, s)),
                year: year.to_string(),
            });
        }
    }
    out
}

/// Writes every (candidate, reference) pair for an external trainer.
pub fn export_pairs(corpus: &Corpus, human: Option<&AssessmentMatrix>, path: &Path) -> Result<()> {
    write(path, &to_jsonl(&pair_records(corpus, human)))
}

/// Checks imported matrices against the corpus: every id must exist and
/// every caption (or caption-reference pair, for reference-level rows) must
/// be scored.
pub fn validate_scores(corpus: &Corpus, matrices: &BTreeMap<String, ScoreMatrix>) -> Result<()> {
    let mut missing = Vec::new();
    for (metric, m) in matrices {
        let per_ref = m.entries().keys().any(|k| k.ref_id.is_some());
        let mut seen = BTreeSet::new();
        for k in m.entries().keys() {
            if corpus.candidate(&k.video_id, &k.system_id).is_none() {
                return Err(Error::UnknownId(format!(
                    "{metric}: ({}, {})",
                    k.video_id, k.system_id
                )));
            }
            if let Some(rid) = &k.ref_id {
                if !corpus.references(&k.video_id).iter().any(|r| &r.ref_id == rid) {
                    return Err(Error::UnknownId(format!(
                        "{metric}: reference {rid} of video {}",
                        k.video_id
                    )));
                }
            } else if per_ref {
                return Err(Error::InvalidArgument(format!(
                    "{metric}: mixes reference-level and caption-level rows"
                )));
            }
            seen.insert(k.clone());
        }
        for ((v, s), _) in corpus.candidates() {
            if per_ref {
                for r in corpus.references(v) {
                    if !seen.contains(&ScoreKey::new(v, Some(&r.ref_id), s)) {
                        missing.push(format!("{metric}: ({v}, {}, {s})", r.ref_id));
                    }
                }
            } else if !seen.contains(&ScoreKey::new(v, None, s)) {
                missing.push(format!("{metric}: ({v}, {s})"));
            }
        }
    }
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::Coverage { missing })
    }
}

/// Loads a `scores.jsonl` produced elsewhere and validates it.
pub fn import_external_scores(path: &Path, corpus: &Corpus) -> Result<BTreeMap<String, ScoreMatrix>> {
    let matrices = read_scores(path)?;
    validate_scores(corpus, &matrices)?;
    Ok(matrices)
}
