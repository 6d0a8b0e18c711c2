use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sample `{sample_id}` has no ratings")]
    EmptyRatings { sample_id: String },

    #[error("sample `{sample_id}`: rating {value} is outside the scale 1..={scale_max}")]
    RatingOutOfRange {
        sample_id: String,
        value: i64,
        scale_max: u32,
    },

    #[error("scale maximum must be at least 2, got {0}")]
    InvalidScale(u32),

    #[error("n must satisfy 1 <= n <= {available}, got {requested}")]
    InvalidLowestCount { requested: usize, available: usize },

    #[error("non-finite value for {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("sample ids differ between inputs: {}", describe_mismatch(.missing_in_left, .missing_in_right))]
    IdMismatch {
        missing_in_left: Vec<String>,
        missing_in_right: Vec<String>,
    },

    #[error("duplicate sample id `{0}`")]
    DuplicateId(String),

    #[error("metric is undefined: {0}")]
    UndefinedMetric(String),

    #[error("{}", format_records(.0))]
    Parse(Vec<RecordError>),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// One rejected input record.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordError {
    /// 1-based line number in the source file.
    pub line: usize,
    pub sample_id: Option<String>,
    pub message: String,
}

impl std::fmt::Display for RecordError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.sample_id {
            Some(id) => write!(f, "line {} (sample `{}`): {}", self.line, id, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

fn format_records(records: &[RecordError]) -> String {
    let mut out = format!("{} invalid record(s)", records.len());
    for r in records {
        out.push_str("\n  ");
        out.push_str(&r.to_string());
    }
    out
}

fn describe_mismatch(left: &[String], right: &[String]) -> String {
    let mut parts = Vec::new();
    if !left.is_empty() {
        parts.push(format!("missing from first input: [{}]", left.join(", ")));
    }
    if !right.is_empty() {
        parts.push(format!("missing from second input: [{}]", right.join(", ")));
    }
    parts.join("; ")
}
