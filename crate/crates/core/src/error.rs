use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("{file}:{line}: duplicate key {key}")]
    DuplicateKey {
        file: String,
        line: usize,
        key: String,
    },

    #[error("{file}:{line}: dangling reference to unknown id \"{id}\"")]
    DanglingReference {
        file: String,
        line: usize,
        id: String,
    },

    #[error("{file}:{line}: raw score {score} outside [0, 100]")]
    ScoreOutOfRange {
        file: String,
        line: usize,
        score: f64,
    },

    #[error("invalid corpus: {0}")]
    InvalidCorpus(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("({video}, {system}) has {count} annotations, minimum is {min} (use --relax-min-annotations to lower it)")]
    TooFewAnnotations {
        video: String,
        system: String,
        count: usize,
        min: usize,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("need at least {needed} {what}, got {got}")]
    TooFewSamples {
        what: String,
        needed: usize,
        got: usize,
    },

    #[error("incomplete coverage, {} missing entries: {}", missing.len(), preview(missing))]
    Coverage { missing: Vec<String> },

    #[error("unknown id in score file: {0}")]
    UnknownId(String),

    #[error("unknown metric \"{0}\"")]
    UnknownMetric(String),

    #[error("metric column \"{0}\" missing")]
    MissingMetric(String),

    #[error("singular system: {0}")]
    Singular(String),
}

fn preview(items: &[String]) -> String {
    const SHOWN: usize = 10;
    let mut out = items.iter().take(SHOWN).cloned().collect::<Vec<_>>().join(", ");
    if items.len() > SHOWN {
        out.push_str(&format!(", ... ({} more)", items.len() - SHOWN));
    }
    out
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
