use std::path::PathBuf;

use thiserror::Error;

/// A single violated configuration invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigIssue {
    #[error("invalid range for `{field}`: lower bound {lo} exceeds upper bound {hi}")]
    InvalidRange { field: &'static str, lo: f64, hi: f64 },
    #[error("invalid value for `{field}`: {reason}")]
    InvalidValue { field: &'static str, reason: String },
    #[error("invalid mixture: {reason}")]
    InvalidMixture { reason: String },
    #[error("texture pool `{}` is unreadable: {reason}", path.display())]
    MissingPool { path: PathBuf, reason: String },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {}", format_issues(.0))]
    InvalidConfig(Vec<ConfigIssue>),
    #[error("config parse error: {0}")]
    ConfigParse(String),
    #[error("texture pool `{}` has no usable entries", .0.display())]
    PoolEmpty(PathBuf),
    #[error("path `{}` is unreadable: {source}", path.display())]
    PathUnreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("texture video `{}` has no frames", .0.display())]
    MissingFrames(PathBuf),
    #[error("image decode failed for `{}`: {reason}", path.display())]
    ImageDecode { path: PathBuf, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u16),
    #[error("unsupported dtype {0}")]
    UnsupportedDtype(u8),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("invalid video shape: {0}")]
    InvalidShape(String),
    #[error("config hash mismatch: dataset was generated with {expected}, current config hashes to {found}")]
    ConfigMismatch { expected: String, found: String },
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("too few samples: need at least {needed}, got {got}")]
    SampleTooSmall { needed: usize, got: usize },
    #[error("covariance is degenerate (condition number {0:e})")]
    DegenerateDistribution(f64),
    #[error("covariance matrix is singular or not positive-definite")]
    SingularCovariance,
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NonSymmetric(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("input has zero variance")]
    ZeroVariance,
    #[error("spectrum is zero (constant frames)")]
    ZeroSpectrum,
    #[error("csv error: {0}")]
    Csv(String),
    #[error("invalid shard: id {id} with {count} workers")]
    InvalidShard { id: u32, count: u32 },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("server error {code}: {message}")]
    Remote { code: u16, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

fn format_issues(issues: &[ConfigIssue]) -> String {
    issues
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::ConfigParse(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Csv(err.to_string())
    }
}
