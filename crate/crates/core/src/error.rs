use std::fmt;

use thiserror::Error;

/// Convenient alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: need at least 2 nodes, got {0}")]
    InvalidDimension(usize),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("network has no edges")]
    EmptyNetwork,

    #[error("empty input")]
    EmptyInput,

    #[error("eigenvalue iteration did not converge (n = {n}, {meta})")]
    NoConvergence { n: usize, meta: String },

    #[error("insufficient levels: need at least {needed}, have {got}")]
    InsufficientLevels { needed: usize, got: usize },

    #[error("degenerate variance: p(1-p) vanishes for p = {0}")]
    DegenerateVariance(f64),

    #[error("polynomial fit failed: {0}")]
    Fit(String),

    #[error("fitted staircase is not increasing on [{lo}, {hi}]")]
    NonMonotone { lo: f64, hi: f64 },

    #[error("unfolded mean spacing {0} outside [0.9, 1.1]")]
    UnfoldingQuality(f64),

    #[error("interval length {length} too long for unfolded span {span} (need span >= 2L)")]
    IntervalTooLong { length: f64, span: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("member {index}, stage {stage}: {source}")]
    Stage {
        index: usize,
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

/// Pipeline stage an error was raised in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Generate,
    Eigen,
    Trim,
    Unfold,
    Statistics,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Generate => "generate",
            Stage::Eigen => "eigen",
            Stage::Trim => "trim",
            Stage::Unfold => "unfold",
            Stage::Statistics => "statistics",
        };
        f.write_str(s)
    }
}

impl Error {
    pub fn at(self, index: usize, stage: Stage) -> Self {
        Error::Stage {
            index,
            stage,
            source: Box::new(self),
        }
    }

    /// Process exit code for the CLI: 2 config, 3 numerical, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stage { source, .. } => source.exit_code(),
            Error::Io(_) => 4,
            Error::Config(_)
            | Error::InvalidSpec(_)
            | Error::InvalidParameter(_)
            | Error::InvalidDimension(_)
            | Error::Parse { .. }
            | Error::EmptyNetwork => 2,
            _ => 3,
        }
    }
}
