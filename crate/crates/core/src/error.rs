use thiserror::Error;

/// Errors produced by the analytic engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("{what} out of range: {value} not in [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: i64,
        lo: i64,
        hi: i64,
    },

    #[error("degenerate composition: N + m = {0} must lie strictly between 0 and n")]
    DegenerateComposition(u32),

    #[error("degenerate fit: all gain predictors are zero")]
    DegenerateFit,

    #[error("policy table has {got} entries, expected {expected}")]
    PolicyLength { got: usize, expected: usize },

    #[error("policy capacity {capacity} at N = {state} exceeds n - N = {max}")]
    PolicyCapacity {
        state: u32,
        capacity: u32,
        max: u32,
    },

    #[error(
        "stationary solve did not converge: residual {residual:.3e} after {iterations} iterations"
    )]
    NonConvergence { residual: f64, iterations: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
