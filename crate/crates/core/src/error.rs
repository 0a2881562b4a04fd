use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid domain layout: {0}")]
    InvalidLayout(String),

    #[error("layout endpoint {position} on the {side} side falls strictly inside a grid edge")]
    LayoutMisaligned { side: &'static str, position: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("non-finite coefficient `{what}` at ({x}, {y})")]
    NonFiniteCoefficient { what: String, x: f64, y: f64 },

    #[error("eigenvalue iteration for {what} did not converge in {iterations} iterations")]
    EigenNoConvergence { what: &'static str, iterations: usize },

    #[error("singular linear system: {0}")]
    SingularSystem(String),

    #[error("step too large: tau*L = {tau_l} must be < 1")]
    StepTooLarge { tau_l: f64 },

    #[error("missing bound: {0}")]
    MissingBound(String),

    #[error(
        "fixed-point iteration diverged at step {step} after {iterations} iterations (last increment {increment:e})"
    )]
    PicardDiverged {
        step: usize,
        iterations: usize,
        increment: f64,
    },

    #[error("smallness condition {condition} violated (margin {margin})")]
    SmallnessViolated { condition: String, margin: f64 },

    #[error("step count M = {steps} must exceed the final time T = {final_time}")]
    StepCountTooSmall { steps: usize, final_time: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("step {step}: {source}")]
    AtStep { step: usize, source: Box<Error> },
}

impl Error {
    /// Strips step-index wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            other => other,
        }
    }
}
