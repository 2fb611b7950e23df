//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid algebra spec: {0}")]
    InvalidSpec(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix in factor {factor} is not traceless (trace = {trace:e})")]
    NotTraceless { factor: usize, trace: f64 },

    #[error("vector is not in the closed positive chamber: {0}")]
    ChamberViolation(String),

    #[error("invalid control signal: {0}")]
    InvalidSignal(String),

    #[error("integration failure at t = {t}: {reason}")]
    IntegrationFailure { t: f64, reason: String },

    #[error("numerical rank loss: {0}")]
    RankLoss(String),

    #[error("unresolved spectrum: {0}")]
    UnresolvedSpectrum(String),

    #[error("inconsistent descriptor: {0}")]
    InconsistentDescriptor(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown component id {0}")]
    UnknownComponent(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
