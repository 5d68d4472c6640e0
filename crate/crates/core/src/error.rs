use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("parameter `{name}` out of range: {message}")]
    OutOfRange { name: &'static str, message: String },

    #[error("unphysical state: {0}")]
    Unphysical(String),

    #[error("temperature {temperature_k} K outside calibration table [{min_k}, {max_k}] K")]
    TemperatureOutOfRange {
        temperature_k: f64,
        min_k: f64,
        max_k: f64,
    },

    #[error("time-tag stream is not sorted at record {index}")]
    UnsortedStream { index: usize },

    #[error("channel {0} is not present in the channel map")]
    UnknownChannel(u16),

    #[error("histogram or curve grids do not match: {0}")]
    GridMismatch(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("fit did not converge after {iterations} iterations (chi2 = {chi2:.6e})")]
    FitFailed { iterations: usize, chi2: f64 },

    #[error("ambiguous fit window: {0}")]
    Ambiguous(String),

    #[error("format error at byte offset {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("configuration error:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn range(name: &'static str, message: impl Into<String>) -> Self {
        Error::OutOfRange {
            name,
            message: message.into(),
        }
    }
}
