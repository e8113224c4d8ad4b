use thiserror::Error;

use crate::gl::StepResponse;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("transfer function denominator has no nonzero term")]
    EmptyDenominator,

    #[error("closed-loop denominator is identically zero")]
    DegenerateClosedLoop,

    /// The plant evaluates to zero or infinity at the dominant pole.
    #[error("plant {part} vanishes at s = {re} {sign} j{im_abs}", sign = if *.im < 0.0 { "-" } else { "+" }, im_abs = .im.abs())]
    PoleCollision { part: &'static str, re: f64, im: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("fitness evaluation failed at {position:?}: {source}")]
    Fitness {
        position: Vec<f64>,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },

    #[error("simulation update coefficient is zero; the equation cannot be solved for y_k")]
    SingularUpdate,

    /// The simulated response left the finite range. The samples computed
    /// before `index` are kept in `response`.
    #[error("simulation diverged: sample {index} is not finite")]
    Diverged {
        index: usize,
        response: Box<StepResponse>,
    },

    #[error("step response needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
}
