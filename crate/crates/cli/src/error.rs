use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or an invalid configuration.
    #[error("{0}")]
    Usage(String),
    /// Input files that are missing, unreadable or malformed.
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    /// Prefixes the message with the sample it concerns.
    pub fn in_sample(self, id: &str) -> Self {
        let wrap = |m: String| format!("sample `{id}`: {m}");
        match self {
            CliError::Usage(m) => CliError::Usage(wrap(m)),
            CliError::Data(m) => CliError::Data(wrap(m)),
            CliError::Numerical(m) => CliError::Numerical(wrap(m)),
        }
    }
}

impl From<latent_mos::Error> for CliError {
    fn from(e: latent_mos::Error) -> Self {
        use latent_mos::Error::*;
        let msg = e.to_string();
        match e {
            InvalidParameter(_) | InvalidScale(_) => CliError::Usage(msg),
            NonFinite(_) | UndefinedMetric(_) => CliError::Numerical(msg),
            EmptyRatings { .. }
            | RatingOutOfRange { .. }
            | InvalidLowestCount { .. }
            | LengthMismatch { .. }
            | IdMismatch { .. }
            | DuplicateId(_)
            | Parse(_)
            | Io(_) => CliError::Data(msg),
        }
    }
}
