use thiserror::Error;

/// Errors raised by the laboratory modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible trajectory: {0}")]
    InfeasibleTrajectory(String),

    #[error("time {t} s outside covered span [{start}, {end}]")]
    OutOfSpan { t: f64, start: f64, end: f64 },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("PRN {0} outside 1..=32")]
    InvalidPrn(u8),

    #[error("block/timing misalignment: {0}")]
    Misalignment(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("runtime abort at t = {t:.3} s, PRN {prn:?}: {reason}")]
    Runtime {
        t: f64,
        prn: Option<u8>,
        reason: String,
    },

    #[error("mismatched reports: {0}")]
    Mismatch(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
