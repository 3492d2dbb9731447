use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by loaders and analytics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("crossed book for {market} at {ts}: best bid {best_bid} >= best ask {best_ask}")]
    CrossedBook {
        market: String,
        ts: String,
        best_bid: String,
        best_ask: String,
    },

    #[error("no mid price: book for {market} at {ts} is one-sided or empty")]
    NoMidPrice { market: String, ts: String },

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    #[error("series too short: need at least {needed} observations, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    #[error("no overlapping minutes between book and trade data")]
    NoOverlap,

    #[error("no trade-active minutes")]
    NoTradeActiveMinutes,

    #[error("zero baseline depth before event {0}")]
    ZeroBaseline(String),

    #[error("series has gaps inside event window {event}: missing {missing:?}")]
    SeriesGaps { event: String, missing: Vec<String> },

    #[error("no eligible LPs: every Q score is zero")]
    NoEligibleLps,

    #[error("zero metric total at position {0}")]
    ZeroTotal(usize),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// True for failures of the filesystem rather than of the data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
