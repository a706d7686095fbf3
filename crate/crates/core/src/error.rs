use thiserror::Error;

/// Errors produced by the bound, comparison and integration routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    /// A signal produced a non-finite value at a grid node.
    #[error("signal `{signal}` is not finite at node {node} (t = {t}): {value}")]
    Evaluation {
        signal: String,
        node: usize,
        t: f64,
        value: f64,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    /// A hypothesis of a bound or construction failed at a grid node.
    #[error("hypothesis `{hypothesis}` violated at node {node} (t = {t}, value = {value})")]
    Validation {
        hypothesis: String,
        node: usize,
        t: f64,
        value: f64,
    },

    #[error("integration produced a non-finite state at node {node} (t = {t})")]
    Integration { node: usize, t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
