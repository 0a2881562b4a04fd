use std::io;
use std::path::PathBuf;

use thiserror::Error;

fn at(line: &Option<usize>) -> String {
    line.map_or_else(String::new, |l| format!("line {l}: "))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}{message}", at(.line))]
    Schema { line: Option<usize>, message: String },

    #[error("{}cannot parse expression `{expr}`: {message}", at(.line))]
    ExpressionParse {
        line: Option<usize>,
        expr: String,
        message: String,
    },

    #[error("{}step count M = {steps} must exceed the final time T = {final_time}", at(.line))]
    StepCountTooSmall {
        line: Option<usize>,
        steps: usize,
        final_time: f64,
    },

    #[error("the scenario declares no exact solution")]
    NoExactSolution,

    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error(transparent)]
    Core(#[from] tecsim_core::Error),
}

impl CliError {
    /// 0 success, 2 smallness failure, 3 solver divergence, 4 configuration
    /// error, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema { .. } | CliError::ExpressionParse { .. } | CliError::StepCountTooSmall { .. } => 4,
            CliError::Core(e) => match e.root() {
                tecsim_core::Error::SmallnessViolated { .. } => 2,
                tecsim_core::Error::PicardDiverged { .. } => 3,
                tecsim_core::Error::StepCountTooSmall { .. }
                | tecsim_core::Error::InvalidLayout(_)
                | tecsim_core::Error::LayoutMisaligned { .. }
                | tecsim_core::Error::MissingBound(_) => 4,
                _ => 1,
            },
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
