//! Word clouds of the best-scored caption/reference pairs of a metric.

mod cloud;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::metrics::{ScoreKey, ScoreMatrix};
use crate::textproc::StopWords;

pub use cloud::{char_width, layout, render_cloud, render_svg, CloudConfig, PlacedWord};

pub const DEFAULT_TOP_K: usize = 10;

/// A scored candidate with the reference text(s) it was scored against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredPair {
    pub key: ScoreKey,
    pub score: f64,
    pub candidate: String,
    /// One reference for per-reference rows, all of the video's
    /// references for rows scored against the whole set.
    pub references: Vec<String>,
}

/// The `k` highest-scoring rows, ties broken by (video, reference, system).
/// Asking for more rows than exist returns all of them with a warning.
pub fn top_pairs(
    scores: &ScoreMatrix,
    corpus: &Corpus,
    k: usize,
) -> Result<(Vec<ScoredPair>, Vec<String>)> {
    let mut rows: Vec<(&ScoreKey, f64)> = scores.entries().iter().map(|(k, v)| (k, *v)).collect();
    rows.sort_by(|a, b| match b.1.total_cmp(&a.1) {
        Ordering::Equal => a.0.cmp(b.0),
        o => o,
    });
    let mut warnings = Vec::new();
    if rows.len() < k {
        warnings.push(format!(
            "{}: asked for the top {k} pairs but only {} are scored",
            scores.metric(),
            rows.len()
        ));
    }
    let pairs = rows
        .into_iter()
        .take(k)
        .map(|(key, score)| {
            let candidate = corpus
                .candidate(&key.video_id, &key.system_id)
                .ok_or_else(|| Error::UnknownId(format!("{}/{}", key.video_id, key.system_id)))?;
            let refs = corpus.references(&key.video_id);
            let references = match &key.ref_id {
                Some(rid) => vec![refs
                    .iter()
                    .find(|r| &r.ref_id == rid)
                    .ok_or_else(|| Error::UnknownId(format!("{}/{rid}", key.video_id)))?
                    .text
                    .clone()],
                None => refs.iter().map(|r| r.text.clone()).collect(),
            };
            Ok(ScoredPair {
                key: key.clone(),
                score,
                candidate: candidate.to_string(),
                references,
            })
        })
        .collect::<Result<_>>()?;
    Ok((pairs, warnings))
}

/// Which half of each pair contributes words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Candidate,
    Reference,
    #[default]
    Both,
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "candidate" => Ok(Side::Candidate),
            "reference" => Ok(Side::Reference),
            "both" => Ok(Side::Both),
            _ => Err(Error::InvalidArgument(format!(
                "side must be candidate, reference or both, got {s:?}"
            ))),
        }
    }
}

/// Word counts ordered by count (descending), then word.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct FrequencyTable {
    pub metric: String,
    pub entries: Vec<(String, usize)>,
}

impl FrequencyTable {
    pub fn from_counts(metric: &str, counts: BTreeMap<String, usize>) -> Self {
        let mut entries: Vec<(String, usize)> = counts.into_iter().filter(|(_, c)| *c > 0).collect();
        // Stable sort keeps the lexicographic order among equal counts.
        entries.sort_by_key(|e| std::cmp::Reverse(e.1));
        FrequencyTable {
            metric: metric.to_string(),
            entries,
        }
    }

    pub fn get(&self, word: &str) -> Option<usize> {
        self.entries.iter().find(|(w, _)| w == word).map(|(_, c)| *c)
    }

    pub fn total(&self) -> usize {
        self.entries.iter().map(|(_, c)| c).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// `word\tcount` lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (w, c) in &self.entries {
            writeln!(out, "{w}\t{c}").unwrap();
        }
        out
    }
}

/// Counts lowercase whitespace-separated words of the chosen side(s),
/// without stripping punctuation, skipping stop-words.
pub fn word_frequencies(
    metric: &str,
    pairs: &[ScoredPair],
    stopwords: &StopWords,
    side: Side,
) -> FrequencyTable {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut add = |text: &str| {
        for w in text.split_whitespace() {
            let w = w.to_lowercase();
            if !stopwords.contains(&w) {
                *counts.entry(w).or_default() += 1;
            }
        }
    };
    for p in pairs {
        if side != Side::Reference {
            add(&p.candidate);
        }
        if side != Side::Candidate {
            p.references.iter().for_each(|r| add(r));
        }
    }
    FrequencyTable::from_counts(metric, counts)
}
