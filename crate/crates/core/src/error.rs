use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid raster: {0}")]
    InvalidRaster(String),

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("invalid annotation: {0}")]
    InvalidAnnotation(String),

    #[error("label file has {} malformed line(s): {}", .0.len(), format_line_errors(.0))]
    MalformedLabels(Vec<LineError>),

    #[error("annotation {index} is not in normalized coordinates")]
    NotNormalized { index: usize },

    #[error("invalid manifest: {0}")]
    InvalidManifest(String),

    #[error("invalid transform: {0}")]
    InvalidTransform(String),

    #[error("registration needs at least 2 point pairs, got {0}")]
    TooFewPoints(usize),

    #[error("all source points coincide; scale is undefined")]
    CoincidentPoints,

    #[error("output of {width}x{height} exceeds the pixel budget of {budget} pixels")]
    PixelBudget { width: usize, height: usize, budget: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("annotation {index} has an unknown class")]
    UnknownClass { index: usize },

    #[error("record {0} has no species tag but carries unlabelled annotations")]
    MissingSpeciesTag(String),

    #[error("mixed coordinate spaces in label lists")]
    MixedSpaces,

    #[error("invalid split request: {0}")]
    InvalidSplit(String),

    #[error("class {0} has zero instances")]
    ZeroCount(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("zero denominator: {0}")]
    ZeroDenominator(String),

    #[error("inconsistent totals: {0}")]
    Inconsistent(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

/// A rejected line in a label or point file, 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

fn format_line_errors(errs: &[LineError]) -> String {
    errs.iter().map(|e| format!("line {}: {}", e.line, e.message)).collect::<Vec<_>>().join("; ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
