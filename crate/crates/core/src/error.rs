use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid factored space: {0}")]
    InvalidSpace(String),

    #[error("state has {got} values, space has {expected} dimensions")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid goal: {0}")]
    InvalidGoal(String),

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("path is not isolated: edge {edge} changes more than one factor")]
    NotIsolated { edge: usize },

    #[error("start state is invalid (out of bounds or in collision)")]
    InvalidStart,

    #[error("no valid goal sample found after {attempts} attempts")]
    NoValidGoalSample { attempts: usize },

    #[error("oracle lattice has {nodes} augmented nodes, budget is {budget}")]
    OracleBudgetExceeded { nodes: u128, budget: u128 },

    #[error("{}:{line}: {message}", .source_name)]
    Scenario {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("path file line {line}: {message}")]
    PathFormat { line: usize, message: String },

    #[error("bench csv line {line}: {message}")]
    BenchCsv { line: usize, message: String },

    #[error("unknown planner `{0}` (expected larrt, rrtstar or rrtconnect)")]
    UnknownPlanner(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
