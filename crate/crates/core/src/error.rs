use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("non-finite value: {0}")]
    NonFinite(&'static str),

    #[error("degenerate temperature kT = {0} (must be > 0)")]
    DegenerateTemperature(f64),

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("empty sample")]
    EmptySample,

    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("robot {0} is in shadow; cannot align to the light")]
    AlignmentImpossible(usize),

    #[error("world has no piston")]
    NoPiston,

    #[error("world has no payload")]
    NoPayload,

    #[error("pistons did not settle within {max_time} s")]
    NotSettled {
        max_time: f64,
        /// (time, volume) pairs sampled while integrating.
        trace: Vec<(f64, f64)>,
    },

    #[error("packing {count} robots into the arena is infeasible")]
    InfeasiblePacking { count: usize },

    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("wrong report kind: expected {expected}")]
    WrongReportKind { expected: &'static str },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
