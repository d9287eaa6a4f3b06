use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{AssessmentMatrix, Corpus};
use crate::error::{Error, Result};

/// Train/test partition that holds out one year.
#[derive(Debug, Clone)]
pub struct YearSplit {
    pub train: (Corpus, AssessmentMatrix),
    pub test: (Corpus, AssessmentMatrix),
    pub held_out_year: String,
    /// Training captions dropped because their text also occurs in the test
    /// year.
    pub excluded: usize,
}

/// Tests on `year` and trains on all other years, minus every caption whose
/// exact text also appears among the test captions.
pub fn leave_one_year_out(
    corpus: &Corpus,
    matrix: &AssessmentMatrix,
    year: &str,
) -> Result<YearSplit> {
    if !corpus.years().contains(year) {
        return Err(Error::InvalidArgument(format!(
            "year {year} not present in corpus"
        )));
    }
    let test = corpus.filtered(|_, y| y == year, |_, _| true);
    let test_texts: BTreeSet<&str> = test.candidates().map(|(_, c)| c).collect();

    let mut excluded = 0;
    let train = corpus.filtered(
        |_, y| y != year,
        |_, caption| {
            let shared = test_texts.contains(caption);
            excluded += usize::from(shared);
            !shared
        },
    );
    if train.num_candidates() == 0 {
        return Err(Error::InvalidArgument(format!(
            "holding out year {year} leaves no training captions"
        )));
    }

    let train_m = matrix.filtered(|v, s| train.candidate(v, s).is_some());
    let test_m = matrix.filtered(|v, s| test.candidate(v, s).is_some());
    Ok(YearSplit {
        train: (train, train_m),
        test: (test, test_m),
        held_out_year: year.to_string(),
        excluded,
    })
}

/// Partitions the video ids into `k` seeded folds of near-equal size.
pub fn video_folds(corpus: &Corpus, k: usize, seed: u64) -> Result<Vec<Vec<String>>> {
    if k == 0 || k > corpus.num_videos() {
        return Err(Error::InvalidArgument(format!(
            "cannot split {} videos into {k} folds",
            corpus.num_videos()
        )));
    }
    let mut ids: Vec<String> = corpus.videos().map(|(v, _)| v.to_string()).collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::new(); k];
    for (i, id) in ids.into_iter().enumerate() {
        folds[i % k].push(id);
    }
    for f in &mut folds {
        f.sort();
    }
    Ok(folds)
}
