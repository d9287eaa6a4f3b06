//! Loading of corpora, human scores and score files from flags.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use capeval_core::corpus::io::corpus_from_jsonl;
use capeval_core::corpus::{
    filter_annotators, standardize, AssessmentMatrix, AssessmentMode, Corpus, DatasetTag,
    RawAnnotation, StandardizeOptions,
};
use capeval_core::metrics::{read_scores, score_all, Metric, ScoreMatrix};

use crate::{CorpusArgs, HumanArgs, Mode, ScoreSource};

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn tag(mode: Mode) -> DatasetTag {
    match mode {
        Mode::Sa => DatasetTag::Sa,
        Mode::Ma => DatasetTag::Ma,
    }
}

pub fn assessment_mode(mode: Mode) -> AssessmentMode {
    match mode {
        Mode::Sa => AssessmentMode::Sa,
        Mode::Ma => AssessmentMode::Ma,
    }
}

/// Keeps only the videos of `year`, when given.
fn restrict(corpus: Corpus, year: Option<&str>) -> Result<Corpus> {
    let Some(year) = year else { return Ok(corpus) };
    if !corpus.years().contains(year) {
        bail!("year {year} not present in the corpus");
    }
    Ok(corpus.filtered(|_, y| y == year, |_, _| true))
}

/// Corpus from the caption and reference files alone.
pub fn load_corpus(args: &CorpusArgs, mode: Mode) -> Result<Corpus> {
    let (corpus, _) = corpus_from_jsonl(&read(&args.captions)?, &read(&args.references)?, "", tag(mode))
        .context("loading corpus")?;
    restrict(corpus, args.year.as_deref())
}

/// Corpus plus raw annotations, validated against each other.
pub fn load_with_annotations(
    args: &CorpusArgs,
    assessments: &Path,
    mode: Mode,
) -> Result<(Corpus, Vec<RawAnnotation>)> {
    let (corpus, anns) = corpus_from_jsonl(
        &read(&args.captions)?,
        &read(&args.references)?,
        &read(assessments)?,
        tag(mode),
    )
    .context("loading corpus")?;
    Ok((restrict(corpus, args.year.as_deref())?, anns))
}

/// Filters annotators, standardizes and keeps the entries of `corpus`.
pub fn human_scores(
    corpus: &Corpus,
    anns: &[RawAnnotation],
    mode: Mode,
    relax: bool,
    floor: f64,
    ceiling: f64,
) -> Result<AssessmentMatrix> {
    let outcome = filter_annotators(anns, floor, ceiling).context("filtering annotators")?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    if !outcome.removed_annotators.is_empty() {
        eprintln!("removed annotators: {}", outcome.removed_annotators.join(", "));
    }
    let mut opts = StandardizeOptions::new(assessment_mode(mode));
    opts.relax_min_annotations = relax;
    let m = standardize(&outcome.kept, &opts).context("standardizing assessments")?;
    for w in m.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(m.filtered(|v, s| corpus.candidate(v, s).is_some()))
}

pub struct Loaded {
    pub corpus: Corpus,
    pub human: AssessmentMatrix,
}

pub fn load_human(corpus: &CorpusArgs, human: &HumanArgs) -> Result<Loaded> {
    let mode = human.mode.unwrap_or(Mode::Sa);
    load_human_as(corpus, human, mode)
}

pub fn load_human_as(corpus: &CorpusArgs, human: &HumanArgs, mode: Mode) -> Result<Loaded> {
    let (c, anns) = load_with_annotations(corpus, &human.assessments, mode)?;
    let h = human_scores(
        &c,
        &anns,
        mode,
        human.relax_min_annotations,
        human.human_floor,
        human.degraded_ceiling,
    )?;
    Ok(Loaded { corpus: c, human: h })
}

/// Canonical metric name: built-in aliases map to their canonical form,
/// other names pass through.
fn canonical(name: &str) -> String {
    name.parse::<Metric>()
        .map(|m| m.name().to_string())
        .unwrap_or_else(|_| name.to_string())
}

/// Names requested by `--metrics`; `None` means every available metric.
fn requested(selection: &str) -> Option<Vec<String>> {
    let names: Vec<String> = selection
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(canonical)
        .collect();
    if names.is_empty() || names.iter().any(|n| n == "all") {
        None
    } else {
        Some(names)
    }
}

/// Score matrices from `--scores` files, or computed on the fly, restricted
/// to the corpus and the `--metrics` selection.
pub fn score_matrices(source: &ScoreSource, corpus: &Corpus) -> Result<Vec<ScoreMatrix>> {
    let wanted = requested(&source.metrics);
    let mut found: BTreeMap<String, ScoreMatrix> = BTreeMap::new();
    if source.scores.is_empty() {
        let selection = match &wanted {
            None => Metric::ALL.to_vec(),
            Some(names) => names
                .iter()
                .map(|n| n.parse::<Metric>())
                .collect::<Result<_, _>>()
                .context("metrics without --scores must be built-in")?,
        };
        let (ms, warnings) = score_all(corpus, &selection)?;
        for w in warnings {
            eprintln!("warning: {w}");
        }
        for m in ms {
            found.insert(m.metric().to_string(), m);
        }
    } else {
        for path in &source.scores {
            let ms = read_scores(path).with_context(|| format!("reading {}", path.display()))?;
            for (name, m) in ms {
                if found.contains_key(&name) {
                    bail!("metric {name} appears in more than one scores file");
                }
                found.insert(name, m.filtered(|k| corpus.has_video(&k.video_id)));
            }
        }
    }
    let out: Vec<ScoreMatrix> = match wanted {
        None => found.into_values().collect(),
        Some(names) => names
            .iter()
            .map(|n| found.remove(n).with_context(|| format!("no scores for metric {n}")))
            .collect::<Result<_>>()?,
    };
    if out.is_empty() {
        bail!("no score matrices selected");
    }
    Ok(out)
}
