use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A slack value makes a cell of the potential-outcome table negative.
    #[error("infeasible slack xi = {xi}: cell {cell} would be negative (feasible range [{lo}, {hi}])")]
    InfeasibleSlack {
        xi: f64,
        lo: f64,
        hi: f64,
        cell: &'static str,
    },

    /// Conditioning on an event that has probability zero under the law.
    #[error("conditioning on a null event: {0}")]
    NullEvent(String),

    /// `tau >= 1`: the relative sufficiency is undefined.
    #[error("relative sufficiency undefined for tau = {0} (perfect transmission)")]
    SigmaUndefined(f64),

    /// The operation is not defined for this class of inputs.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A construction produces entries outside [0, 1].
    #[error("construction infeasible: {0}")]
    Infeasible(String),

    /// A documented precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Inconsistent shapes, e.g. an evidence pattern of the wrong length.
    #[error("structural error: {0}")]
    Structural(String),

    /// Label normalization needs every step to have a nonzero effect.
    #[error("cannot normalize labels: step {step} has zero effect")]
    NormalizationImpossible { step: usize },

    /// Exhaustive search refused because the pattern space is too large.
    #[error("exhaustive search over n = {n} steps refused (max {max}); use the closed form")]
    SearchTooLarge { n: usize, max: usize },

    /// A witness failed to reproduce its closed-form value.
    #[error("witness mismatch for {what}: closed form {expected}, bounds engine {actual}")]
    WitnessMismatch {
        what: String,
        expected: f64,
        actual: f64,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors raised because the requested quantity does not exist
    /// for a well-formed input (null events, infeasible constructions, ...),
    /// as opposed to malformed input.
    pub fn is_infeasibility(&self) -> bool {
        !matches!(
            self,
            Error::Domain(_) | Error::Structural(_) | Error::Parse(_)
        )
    }
}
