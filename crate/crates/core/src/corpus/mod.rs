//! Captions, references and human assessments.
//!
//! A [`Corpus`] is built from three JSONL files (see [`io`]) and is immutable
//! afterwards. Human scores travel separately as [`RawAnnotation`]s until
//! they are filtered and standardized into an [`AssessmentMatrix`].

pub mod io;
mod split;
mod standardize;
mod synth;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{load_corpus, parse_assessments, parse_captions, parse_references};
pub use split::{leave_one_year_out, video_folds, YearSplit};
pub use standardize::{
    filter_annotators, standardize, zscores, AssessmentMatrix, AssessmentMode, FilterOutcome,
    StandardizeOptions, DEFAULT_DEGRADED_CEILING, DEFAULT_HUMAN_FLOOR, DEFAULT_MIN_ANNOTATIONS,
};
pub use synth::{generate_synthetic, SynthConfig};

/// Most references a single video may carry.
pub const MAX_REFERENCES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetTag {
    Sa,
    Ma,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reference {
    pub ref_id: String,
    pub text: String,
}

/// Kind of item an annotator scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlKind {
    /// A real system caption.
    System,
    /// A human-written caption used as a positive control.
    Human,
    /// A deliberately degraded caption used as a negative control.
    Degraded,
}

/// One annotator's 0-100 judgment of one caption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawAnnotation {
    pub video_id: String,
    pub system_id: String,
    pub annotator_id: String,
    pub raw_score: f64,
    pub control: ControlKind,
}

/// Videos with their human references and system captions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    /// video id -> year label
    videos: BTreeMap<String, String>,
    /// video id -> references in input order
    references: BTreeMap<String, Vec<Reference>>,
    /// (video id, system id) -> caption
    candidates: BTreeMap<(String, String), String>,
    dataset_tag: DatasetTag,
}

/// Key of one system caption.
pub type CaptionKey = (String, String);

impl Corpus {
    /// Assembles and validates a corpus from parsed records.
    pub fn from_records(
        captions: &[io::CaptionRecord],
        references: &[io::ReferenceRecord],
        dataset_tag: DatasetTag,
    ) -> Result<Self> {
        let numbered_caps: Vec<_> = captions.iter().cloned().enumerate().map(|(i, r)| (i + 1, r)).collect();
        let numbered_refs: Vec<_> = references.iter().cloned().enumerate().map(|(i, r)| (i + 1, r)).collect();
        Self::from_numbered(&numbered_caps, &numbered_refs, dataset_tag)
    }

    pub(crate) fn from_numbered(
        captions: &[(usize, io::CaptionRecord)],
        references: &[(usize, io::ReferenceRecord)],
        dataset_tag: DatasetTag,
    ) -> Result<Self> {
        let mut videos: BTreeMap<String, String> = BTreeMap::new();
        let mut refs: BTreeMap<String, Vec<Reference>> = BTreeMap::new();
        for (line, r) in references {
            match videos.get(&r.video_id) {
                Some(year) if *year != r.year => {
                    return Err(Error::Parse {
                        file: io::REFERENCES.into(),
                        line: *line,
                        message: format!(
                            "video {} labelled year {} here but {} earlier",
                            r.video_id, r.year, year
                        ),
                    })
                }
                Some(_) => {}
                None => {
                    videos.insert(r.video_id.clone(), r.year.clone());
                }
            }
            let list = refs.entry(r.video_id.clone()).or_default();
            if list.iter().any(|x| x.ref_id == r.ref_id) {
                return Err(Error::DuplicateKey {
                    file: io::REFERENCES.into(),
                    line: *line,
                    key: format!("({}, {})", r.video_id, r.ref_id),
                });
            }
            if list.len() == MAX_REFERENCES {
                return Err(Error::Parse {
                    file: io::REFERENCES.into(),
                    line: *line,
                    message: format!(
                        "video {} has more than {MAX_REFERENCES} references",
                        r.video_id
                    ),
                });
            }
            list.push(Reference {
                ref_id: r.ref_id.clone(),
                text: r.text.clone(),
            });
        }

        let mut candidates = BTreeMap::new();
        for (line, c) in captions {
            let Some(year) = videos.get(&c.video_id) else {
                return Err(Error::DanglingReference {
                    file: io::CAPTIONS.into(),
                    line: *line,
                    id: c.video_id.clone(),
                });
            };
            if *year != c.year {
                return Err(Error::Parse {
                    file: io::CAPTIONS.into(),
                    line: *line,
                    message: format!(
                        "video {} has year {} in references but {} here",
                        c.video_id, year, c.year
                    ),
                });
            }
            let key = (c.video_id.clone(), c.system_id.clone());
            if candidates.contains_key(&key) {
                return Err(Error::DuplicateKey {
                    file: io::CAPTIONS.into(),
                    line: *line,
                    key: format!("({}, {})", c.video_id, c.system_id),
                });
            }
            candidates.insert(key, c.caption.clone());
        }

        Ok(Corpus {
            videos,
            references: refs,
            candidates,
            dataset_tag,
        })
    }

    /// Checks annotation rows against this corpus. Control rows only need a
    /// known video; system rows need an existing caption.
    pub fn validate_annotations(&self, annotations: &[RawAnnotation]) -> Result<()> {
        for (i, a) in annotations.iter().enumerate() {
            io::check_annotation(self, i + 1, a)?;
        }
        Ok(())
    }

    pub fn dataset_tag(&self) -> DatasetTag {
        self.dataset_tag
    }

    /// Video ids with their year labels, sorted by id.
    pub fn videos(&self) -> impl Iterator<Item = (&str, &str)> {
        self.videos.iter().map(|(v, y)| (v.as_str(), y.as_str()))
    }

    pub fn has_video(&self, video_id: &str) -> bool {
        self.videos.contains_key(video_id)
    }

    pub fn year_of(&self, video_id: &str) -> Option<&str> {
        self.videos.get(video_id).map(String::as_str)
    }

    pub fn references(&self, video_id: &str) -> &[Reference] {
        self.references.get(video_id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// `((video, system), caption)` in key order.
    pub fn candidates(&self) -> impl Iterator<Item = (&CaptionKey, &str)> {
        self.candidates.iter().map(|(k, c)| (k, c.as_str()))
    }

    pub fn candidate(&self, video_id: &str, system_id: &str) -> Option<&str> {
        self.candidates
            .get(&(video_id.to_string(), system_id.to_string()))
            .map(String::as_str)
    }

    pub fn systems(&self) -> BTreeSet<&str> {
        self.candidates.keys().map(|(_, s)| s.as_str()).collect()
    }

    pub fn years(&self) -> BTreeSet<&str> {
        self.videos.values().map(String::as_str).collect()
    }

    /// N: number of videos.
    pub fn num_videos(&self) -> usize {
        self.videos.len()
    }

    /// M: largest number of references on any video.
    pub fn max_references(&self) -> usize {
        self.references.values().map(Vec::len).max().unwrap_or(0)
    }

    /// S: number of distinct systems.
    pub fn num_systems(&self) -> usize {
        self.systems().len()
    }

    pub fn num_candidates(&self) -> usize {
        self.candidates.len()
    }

    /// Sub-corpus of the videos accepted by `keep_video` and the captions
    /// accepted by `keep_caption`.
    pub fn filtered(
        &self,
        mut keep_video: impl FnMut(&str, &str) -> bool,
        mut keep_caption: impl FnMut(&CaptionKey, &str) -> bool,
    ) -> Corpus {
        let videos: BTreeMap<String, String> = self
            .videos
            .iter()
            .filter(|(v, y)| keep_video(v, y))
            .map(|(v, y)| (v.clone(), y.clone()))
            .collect();
        let references = self
            .references
            .iter()
            .filter(|(v, _)| videos.contains_key(*v))
            .map(|(v, r)| (v.clone(), r.clone()))
            .collect();
        let candidates = self
            .candidates
            .iter()
            .filter(|((v, _), _)| videos.contains_key(v))
            .filter(|(k, c)| keep_caption(k, c))
            .map(|(k, c)| (k.clone(), c.clone()))
            .collect();
        Corpus {
            videos,
            references,
            candidates,
            dataset_tag: self.dataset_tag,
        }
    }

    /// Same corpus with every caption replaced by `f(key, caption)`.
    pub fn map_captions(&self, mut f: impl FnMut(&CaptionKey, &str) -> String) -> Corpus {
        let candidates = self
            .candidates
            .iter()
            .map(|(k, c)| (k.clone(), f(k, c)))
            .collect();
        Corpus {
            videos: self.videos.clone(),
            references: self.references.clone(),
            candidates,
            dataset_tag: self.dataset_tag,
        }
    }

    /// Flat records in deterministic order, suitable for writing back out.
    pub fn caption_records(&self) -> Vec<io::CaptionRecord> {
        self.candidates
            .iter()
            .map(|((v, s), c)| io::CaptionRecord {
                video_id: v.clone(),
                system_id: s.clone(),
                year: self.videos[v].clone(),
                caption: c.clone(),
            })
            .collect()
    }

    pub fn reference_records(&self) -> Vec<io::ReferenceRecord> {
        self.references
            .iter()
            .flat_map(|(v, refs)| {
                refs.iter().map(move |r| io::ReferenceRecord {
                    video_id: v.clone(),
                    ref_id: r.ref_id.clone(),
                    year: self.videos[v].clone(),
                    text: r.text.clone(),
                })
            })
            .collect()
    }
}
