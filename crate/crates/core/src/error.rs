use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A value handed to an update or constructor is not acceptable.
    #[error("rejected input: {0}")]
    InvalidInput(String),

    /// A function was evaluated outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Experiment, prior or policy configuration is inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("arm index {arm} out of range for {arms} arms")]
    Index { arm: usize, arms: usize },

    #[error("all log-weights are -inf")]
    DegenerateWeights,

    #[error("posterior has no remaining mass")]
    DegeneratePosterior,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadrature did not converge: achieved error bound {achieved:e} > tolerance {tol:e}")]
    Accuracy { achieved: f64, tol: f64 },

    #[error("verification of `{identity}` failed: residual {residual:e} exceeds {tolerance:e}")]
    Verification {
        identity: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("episode {stream_id} failed: {source}")]
    Episode {
        stream_id: u64,
        #[source]
        source: Box<Error>,
    },
}
