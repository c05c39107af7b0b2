use thiserror::Error;

/// Errors produced by the encoding and simulation pipeline.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },

    #[error("series has {got} coefficients, degree {degree} needs {}", degree + 1)]
    SeriesLength { degree: usize, got: usize },

    /// An elementary operation was evaluated or expanded at a singular point
    /// (division by ~zero, tan at an odd multiple of pi/2).
    #[error("{op} is singular at the requested point")]
    Singular { op: &'static str },

    /// Integration aborted; `time` is where the right-hand side failed or the
    /// state stopped being finite.
    #[error("integration aborted at t = {time}: {reason}")]
    Integration { time: f64, reason: String },

    #[error("trajectory grids differ: {0}")]
    GridMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// Every admissible model order for a segment was rejected.
    #[error("no feasible model order for segment [{t_start}, {t_stop}]")]
    SegmentInfeasible { t_start: f64, t_stop: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
