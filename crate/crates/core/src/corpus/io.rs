//! JSONL ingestion and output for captions, references and assessments.
//!
//! One JSON object per line, UTF-8, unknown fields ignored, blank lines
//! skipped. Errors carry the 1-based line number of the offending row.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{Corpus, DatasetTag, RawAnnotation};
use crate::error::{Error, Result};

pub(crate) const CAPTIONS: &str = "captions.jsonl";
pub(crate) const REFERENCES: &str = "references.jsonl";
pub(crate) const ASSESSMENTS: &str = "assessments.jsonl";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptionRecord {
    pub video_id: String,
    pub system_id: String,
    pub year: String,
    pub caption: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceRecord {
    pub video_id: String,
    pub ref_id: String,
    pub year: String,
    pub text: String,
}

/// Parses JSONL text into `(line number, record)` pairs.
pub fn parse_jsonl<T: DeserializeOwned>(text: &str, file: &str) -> Result<Vec<(usize, T)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(line).map_err(|e| Error::Parse {
            file: file.to_string(),
            line: line_no,
            message: e.to_string(),
        })?;
        out.push((line_no, record));
    }
    Ok(out)
}

pub fn parse_captions(text: &str) -> Result<Vec<(usize, CaptionRecord)>> {
    parse_jsonl(text, CAPTIONS)
}

pub fn parse_references(text: &str) -> Result<Vec<(usize, ReferenceRecord)>> {
    parse_jsonl(text, REFERENCES)
}

/// Parses assessment rows and range-checks every raw score.
pub fn parse_assessments(text: &str) -> Result<Vec<(usize, RawAnnotation)>> {
    let rows: Vec<(usize, RawAnnotation)> = parse_jsonl(text, ASSESSMENTS)?;
    for (line, a) in &rows {
        check_score(*line, a.raw_score)?;
    }
    Ok(rows)
}

fn check_score(line: usize, score: f64) -> Result<()> {
    if !(0.0..=100.0).contains(&score) {
        return Err(Error::ScoreOutOfRange {
            file: ASSESSMENTS.into(),
            line,
            score,
        });
    }
    Ok(())
}

pub(crate) fn check_annotation(corpus: &Corpus, line: usize, a: &RawAnnotation) -> Result<()> {
    check_score(line, a.raw_score)?;
    if !corpus.has_video(&a.video_id) {
        return Err(Error::DanglingReference {
            file: ASSESSMENTS.into(),
            line,
            id: a.video_id.clone(),
        });
    }
    if a.control == super::ControlKind::System
        && corpus.candidate(&a.video_id, &a.system_id).is_none()
    {
        return Err(Error::DanglingReference {
            file: ASSESSMENTS.into(),
            line,
            id: format!("{}/{}", a.video_id, a.system_id),
        });
    }
    Ok(())
}

/// Builds a corpus from the contents of the three files and validates the
/// annotations against it.
pub fn corpus_from_jsonl(
    captions: &str,
    references: &str,
    assessments: &str,
    dataset_tag: DatasetTag,
) -> Result<(Corpus, Vec<RawAnnotation>)> {
    let caps = parse_captions(captions)?;
    let refs = parse_references(references)?;
    let anns = parse_assessments(assessments)?;
    let corpus = Corpus::from_numbered(&caps, &refs, dataset_tag)?;
    let mut seen = HashSet::new();
    for (line, a) in &anns {
        check_annotation(&corpus, *line, a)?;
        if a.control == super::ControlKind::System
            && !seen.insert((&a.video_id, &a.system_id, &a.annotator_id))
        {
            return Err(Error::DuplicateKey {
                file: ASSESSMENTS.into(),
                line: *line,
                key: format!("({}, {}, {})", a.video_id, a.system_id, a.annotator_id),
            });
        }
    }
    Ok((corpus, anns.into_iter().map(|(_, a)| a).collect()))
}

pub(crate) fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Loads and cross-references the three corpus files.
pub fn load_corpus(
    caption_file: &Path,
    reference_file: &Path,
    assessment_file: &Path,
    dataset_tag: DatasetTag,
) -> Result<(Corpus, Vec<RawAnnotation>)> {
    let captions = read(caption_file)?;
    let references = read(reference_file)?;
    let assessments = read(assessment_file)?;
    corpus_from_jsonl(&captions, &references, &assessments, dataset_tag)
}

/// Serializes records one per line, with a trailing newline.
pub fn to_jsonl<T: Serialize>(records: &[T]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub(crate) fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `captions.jsonl`, `references.jsonl` and `assessments.jsonl`
/// into `dir`.
pub fn write_corpus(dir: &Path, corpus: &Corpus, annotations: &[RawAnnotation]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write(&dir.join(CAPTIONS), &to_jsonl(&corpus.caption_records()))?;
    write(&dir.join(REFERENCES), &to_jsonl(&corpus.reference_records()))?;
    write(&dir.join(ASSESSMENTS), &to_jsonl(annotations))?;
    Ok(())
}
