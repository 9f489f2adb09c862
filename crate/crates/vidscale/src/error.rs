//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Tensor extents do not line up for the requested operation.
    #[error("shape mismatch in {op}: left {left:?} vs right {right:?}")]
    Shape {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },

    /// A configuration value is invalid or inconsistent.
    #[error("config error: {0}")]
    Config(String),

    /// Runtime input violates an operation's precondition.
    #[error("input error: {0}")]
    Input(String),

    /// A numeric quantity became non-finite where the contract requires finiteness.
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    /// Training loss went NaN/Inf.
    #[error("training diverged at step {step}: loss = {loss}")]
    Diverged { step: usize, loss: f64 },

    /// A pipeline stage needs a checkpoint another stage has not produced.
    #[error("dependency error: stage '{stage}' requires missing artifact {path}")]
    Dependency { stage: String, path: String },

    /// Malformed on-disk container or config file.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
