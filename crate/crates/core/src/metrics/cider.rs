//! CIDEr consensus score (plain variant, no length penalty).
//!
//! A "document" is the reference set of one video. For n = 1..=4 every
//! sentence becomes a vector of `count(g) * ln(num_docs / df(g))`; the score
//! averages cosine similarity over references, then over n, and scales by 10.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::textproc::{ngrams_of, TokenSequence};

pub const CIDER_MAX_N: usize = 4;
pub const CIDER_SCALE: f64 = 10.0;

/// Document frequencies of the n-grams of one order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdfTable {
    n: usize,
    doc_frequency: BTreeMap<Vec<String>, usize>,
    num_docs: usize,
}

impl IdfTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_docs(&self) -> usize {
        self.num_docs
    }

    pub fn doc_frequency(&self, gram: &[String]) -> usize {
        self.doc_frequency.get(gram).copied().unwrap_or(0)
    }

    /// `ln(num_docs / max(df, 1))`; n-grams absent from every reference set
    /// count as appearing in one document.
    pub fn idf(&self, gram: &[String]) -> f64 {
        let df = self.doc_frequency(gram).max(1);
        (self.num_docs as f64 / df as f64).ln()
    }
}

/// IDF tables for n = 1..=4, fitted once on the corpus reference sets.
#[derive(Debug, Clone, PartialEq)]
pub struct CiderModel {
    tables: Vec<IdfTable>,
}

impl CiderModel {
    pub fn fit<'a, I>(reference_sets: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [TokenSequence]>,
    {
        let sets: Vec<&[TokenSequence]> = reference_sets.into_iter().collect();
        if sets.is_empty() {
            return Err(Error::InvalidArgument("CIDEr needs a non-empty corpus".into()));
        }
        let tables = (1..=CIDER_MAX_N)
            .map(|n| {
                let mut doc_frequency = BTreeMap::new();
                for refs in &sets {
                    let grams: BTreeSet<Vec<String>> = refs
                        .iter()
                        .flat_map(|r| ngrams_of(r.tokens(), n).counts().keys().cloned().collect::<Vec<_>>())
                        .collect();
                    for g in grams {
                        *doc_frequency.entry(g).or_insert(0) += 1;
                    }
                }
                IdfTable {
                    n,
                    doc_frequency,
                    num_docs: sets.len(),
                }
            })
            .collect();
        Ok(CiderModel { tables })
    }

    pub fn tables(&self) -> &[IdfTable] {
        &self.tables
    }

    pub fn num_docs(&self) -> usize {
        self.tables[0].num_docs
    }

    /// True when every IDF weight is zero (a single reference set).
    pub fn is_degenerate(&self) -> bool {
        self.num_docs() <= 1
    }

    fn vector(&self, tokens: &[String], n: usize) -> BTreeMap<Vec<String>, f64> {
        let table = &self.tables[n - 1];
        ngrams_of(tokens, n)
            .iter()
            .map(|(g, c)| (g.clone(), c as f64 * table.idf(g)))
            .collect()
    }

    /// CIDEr of one candidate against its video's references, in [0, 10].
    pub fn score(&self, candidate: &TokenSequence, references: &[TokenSequence]) -> f64 {
        if references.is_empty() {
            return 0.0;
        }
        let mut total = 0.0;
        for n in 1..=CIDER_MAX_N {
            let cv = self.vector(candidate.tokens(), n);
            let sims: f64 = references
                .iter()
                .map(|r| cosine(&cv, &self.vector(r.tokens(), n)))
                .sum();
            total += sims / references.len() as f64;
        }
        CIDER_SCALE * total / CIDER_MAX_N as f64
    }
}

fn cosine(a: &BTreeMap<Vec<String>, f64>, b: &BTreeMap<Vec<String>, f64>) -> f64 {
    let norm = |v: &BTreeMap<Vec<String>, f64>| v.values().map(|x| x * x).sum::<f64>().sqrt();
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let dot: f64 = a
        .iter()
        .filter_map(|(g, x)| b.get(g).map(|y| x * y))
        .sum();
    (dot / (na * nb)).clamp(0.0, 1.0)
}
