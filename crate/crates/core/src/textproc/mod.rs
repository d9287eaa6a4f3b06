//! Tokenization, n-gram bags, stemming, stop-words and seeded word shuffling.
//!
//! Every metric in [`crate::metrics`] consumes [`TokenSequence`]s produced by
//! [`tokenize`], so all of them agree on what a "word" is.

mod porter;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use porter::stem;

const STRIP: &[char] = &['.', ',', ';', ':', '!', '?', '"', '\'', '(', ')'];

/// Lowercased words of a text, in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    tokens: Vec<String>,
    source_text: String,
}

impl TokenSequence {
    /// Builds a sequence from already tokenized words. Empty words are
    /// dropped and whitespace inside a word splits it.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let tokens: Vec<String> = tokens
            .into_iter()
            .flat_map(|t| {
                t.as_ref()
                    .split_whitespace()
                    .map(str::to_string)
                    .collect::<Vec<_>>()
            })
            .collect();
        let source_text = tokens.join(" ");
        TokenSequence {
            tokens,
            source_text,
        }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn source_text(&self) -> &str {
        &self.source_text
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Space-joined tokens.
    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Lowercases, splits on whitespace and strips leading/trailing
/// `.,;:!?"'()` from every word. Apostrophes inside a word are kept.
pub fn tokenize(text: &str) -> TokenSequence {
    let tokens = text
        .split_whitespace()
        .map(|w| w.to_lowercase())
        .filter_map(|w| {
            let trimmed = w.trim_matches(STRIP);
            (!trimmed.is_empty()).then(|| trimmed.to_string())
        })
        .collect();
    TokenSequence {
        tokens,
        source_text: text.to_string(),
    }
}

/// Multiset of contiguous n-grams.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NGramBag {
    n: usize,
    counts: BTreeMap<Vec<String>, usize>,
}

impl NGramBag {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &BTreeMap<Vec<String>, usize> {
        &self.counts
    }

    pub fn get(&self, gram: &[String]) -> usize {
        self.counts.get(gram).copied().unwrap_or(0)
    }

    /// Sum of all multiplicities.
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<String>, usize)> {
        self.counts.iter().map(|(g, &c)| (g, c))
    }

    /// Matches of `self` against `reference`, each gram clipped to the
    /// reference multiplicity.
    pub fn clipped_matches(&self, reference: &NGramBag) -> usize {
        self.iter().map(|(g, c)| c.min(reference.get(g))).sum()
    }
}

/// All contiguous n-grams of `seq` with multiplicity.
pub fn ngrams(seq: &TokenSequence, n: usize) -> Result<NGramBag> {
    if n == 0 {
        return Err(Error::InvalidArgument("n-gram order must be >= 1".into()));
    }
    Ok(ngrams_of(seq.tokens(), n))
}

pub(crate) fn ngrams_of(tokens: &[String], n: usize) -> NGramBag {
    let mut counts = BTreeMap::new();
    if n > 0 && tokens.len() >= n {
        for window in tokens.windows(n) {
            *counts.entry(window.to_vec()).or_insert(0) += 1;
        }
    }
    NGramBag { n, counts }
}

/// Uniform (Fisher-Yates) permutation of the words, fixed by `seed`.
pub fn shuffle_words(seq: &TokenSequence, seed: u64) -> TokenSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tokens = seq.tokens.clone();
    tokens.shuffle(&mut rng);
    TokenSequence::from_tokens(tokens)
}

static DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

/// Set of lowercase words ignored by frequency counts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StopWords {
    words: HashSet<String>,
}

impl StopWords {
    /// The English list shipped in `data/stopwords.txt`.
    pub fn english() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// One word per line; blank lines and `#` comments are skipped and
    /// words are lowercased.
    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        StopWords { words }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Anything stop-words can be removed from: token sequences and word
/// frequency maps.
pub trait RemoveStopwords: Sized {
    fn remove_stopwords(self, stopwords: &StopWords) -> Self;
}

impl RemoveStopwords for TokenSequence {
    fn remove_stopwords(self, stopwords: &StopWords) -> Self {
        TokenSequence::from_tokens(self.tokens.into_iter().filter(|t| !stopwords.contains(t)))
    }
}

impl RemoveStopwords for BTreeMap<String, usize> {
    fn remove_stopwords(mut self, stopwords: &StopWords) -> Self {
        self.retain(|w, _| !stopwords.contains(w));
        self
    }
}

pub fn remove_stopwords<T: RemoveStopwords>(input: T, stopwords: &StopWords) -> T {
    input.remove_stopwords(stopwords)
}

/// Stems of every token.
pub fn stems(seq: &TokenSequence) -> Vec<String> {
    seq.tokens().iter().map(|t| stem(t)).collect()
}

/// Distinct tokens, sorted.
pub fn vocabulary(seq: &TokenSequence) -> BTreeSet<&str> {
    seq.tokens().iter().map(String::as_str).collect()
}
