//! Reference-based caption metrics and corpus-wide scoring.

pub mod bleu;
pub mod cider;
pub mod meteor;
pub mod rouge;
mod scores;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::textproc::{tokenize, TokenSequence};

pub use bleu::{bleu_corpus, sent_bleu};
pub use cider::{CiderModel, IdfTable};
pub use meteor::meteor_lite;
pub use rouge::rouge_l;
pub use scores::{
    parse_scores, read_scores, scores_to_jsonl, write_scores, MetricScore, ScoreKey, ScoreMatrix,
};

/// Whether a metric scores a caption per reference or against all
/// references together.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefScope {
    Single,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    /// BLEU-4 of one caption against all its references, unsmoothed.
    Bleu4,
    /// Add-one smoothed sentence BLEU-4 per reference.
    SentBleu,
    RougeL,
    MeteorLite,
    Cider,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Bleu4,
        Metric::SentBleu,
        Metric::RougeL,
        Metric::MeteorLite,
        Metric::Cider,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Bleu4 => "bleu4",
            Metric::SentBleu => "sentbleu",
            Metric::RougeL => "rouge_l",
            Metric::MeteorLite => "meteor_lite",
            Metric::Cider => "cider",
        }
    }

    pub fn scope(self) -> RefScope {
        match self {
            Metric::Bleu4 | Metric::Cider => RefScope::All,
            Metric::SentBleu | Metric::RougeL | Metric::MeteorLite => RefScope::Single,
        }
    }

    /// Inclusive value range.
    pub fn range(self) -> (f64, f64) {
        match self {
            Metric::Cider => (0.0, cider::CIDER_SCALE),
            _ => (0.0, 1.0),
        }
    }

    /// Parses a comma-separated selection; `all` expands to every metric.
    pub fn parse_selection(s: &str) -> Result<Vec<Metric>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "all" {
                out.extend(Metric::ALL);
            } else {
                out.push(part.parse()?);
            }
        }
        out.sort();
        out.dedup();
        if out.is_empty() {
            return Err(Error::InvalidArgument("empty metric selection".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bleu4" | "bleu-4" | "bleu" => Ok(Metric::Bleu4),
            "sentbleu" | "sent-bleu" => Ok(Metric::SentBleu),
            "rouge_l" | "rouge-l" | "rouge" => Ok(Metric::RougeL),
            "meteor_lite" | "meteor-lite" | "meteor" => Ok(Metric::MeteorLite),
            "cider" => Ok(Metric::Cider),
            _ => Err(Error::UnknownMetric(s.to_string())),
        }
    }
}

struct Tokenized {
    /// (video, system, candidate tokens)
    captions: Vec<(String, String, TokenSequence)>,
    /// video -> [(ref id, tokens)]
    references: std::collections::BTreeMap<String, Vec<(String, TokenSequence)>>,
}

fn tokenize_corpus(corpus: &Corpus) -> Tokenized {
    let references = corpus
        .videos()
        .map(|(v, _)| {
            let refs = corpus
                .references(v)
                .iter()
                .map(|r| (r.ref_id.clone(), tokenize(&r.text)))
                .collect();
            (v.to_string(), refs)
        })
        .collect();
    let captions = corpus
        .candidates()
        .map(|((v, s), c)| (v.clone(), s.clone(), tokenize(c)))
        .collect();
    Tokenized {
        captions,
        references,
    }
}

fn score_metric(metric: Metric, data: &Tokenized) -> Result<ScoreMatrix> {
    let cider = if metric == Metric::Cider {
        let sets: Vec<Vec<TokenSequence>> = data
            .references
            .values()
            .map(|refs| refs.iter().map(|(_, t)| t.clone()).collect())
            .collect();
        Some(CiderModel::fit(sets.iter().map(Vec::as_slice))?)
    } else {
        None
    };

    // Parallel over captions; `collect` keeps input order.
    let rows: Vec<Vec<(ScoreKey, f64)>> = data
        .captions
        .par_iter()
        .map(|(v, s, cand)| -> Result<Vec<(ScoreKey, f64)>> {
            let refs = &data.references[v];
            let ref_tokens: Vec<TokenSequence> = refs.iter().map(|(_, t)| t.clone()).collect();
            Ok(match metric {
                Metric::Bleu4 => vec![(
                    ScoreKey::new(v, None, s),
                    bleu_corpus(std::slice::from_ref(cand), &[ref_tokens], 4)?,
                )],
                Metric::Cider => vec![(
                    ScoreKey::new(v, None, s),
                    cider.as_ref().expect("fitted").score(cand, &ref_tokens),
                )],
                Metric::SentBleu | Metric::RougeL | Metric::MeteorLite => refs
                    .iter()
                    .map(|(rid, r)| {
                        let one = std::slice::from_ref(r);
                        let x = match metric {
                            Metric::SentBleu => sent_bleu(cand, one, 4)?,
                            Metric::RougeL => rouge_l(cand, one)?,
                            _ => meteor_lite(cand, one)?,
                        };
                        Ok((ScoreKey::new(v, Some(rid), s), x))
                    })
                    .collect::<Result<_>>()?,
            })
        })
        .collect::<Result<_>>()?;

    let mut m = ScoreMatrix::new(metric.name());
    for (k, x) in rows.into_iter().flatten() {
        m.insert(k, x);
    }
    Ok(m)
}

/// Scores every caption of `corpus` with each selected metric. Returns one
/// matrix per metric, in selection order, plus warnings.
pub fn score_all(corpus: &Corpus, selection: &[Metric]) -> Result<(Vec<ScoreMatrix>, Vec<String>)> {
    let data = tokenize_corpus(corpus);
    let mut warnings = Vec::new();
    if selection.contains(&Metric::Cider) && corpus.num_videos() <= 1 {
        warnings.push("CIDEr: a single reference set makes every IDF weight zero".to_string());
    }
    let matrices = selection
        .iter()
        .map(|&m| score_metric(m, &data))
        .collect::<Result<_>>()?;
    Ok((matrices, warnings))
}

/// Corpus-level CIDEr for every caption of `corpus`.
pub fn cider_corpus(corpus: &Corpus) -> Result<(ScoreMatrix, Vec<String>)> {
    if corpus.num_candidates() == 0 {
        return Err(Error::InvalidArgument("CIDEr on an empty corpus".into()));
    }
    let (mut m, w) = score_all(corpus, &[Metric::Cider])?;
    Ok((m.remove(0), w))
}
