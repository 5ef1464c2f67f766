//! Motion planning over factored state spaces where the cost of a path is the
//! number of actions it takes, i.e. the number of maximal runs of edges that
//! move the same factor.
//!
//! The crate provides the factored space and its interpolation, a planar box
//! scene engine for collision checking, the bi-directional planner with path
//! defragmentation, additive-cost baselines, an exact lattice oracle for small
//! problems, a set of built-in puzzle scenarios and a benchmark harness.

pub mod baselines;
pub mod bench;
pub mod cli;
pub mod defrag;
pub mod error;
#[cfg(test)]
mod fixtures;
pub mod geometry;
pub mod nn;
pub mod oracle;
pub mod pathfile;
pub mod planner;
pub mod scenario;
pub mod scene;
pub mod space;

pub use error::{Error, Result};
pub use scene::{Body, BodyKind, JointBinding, JointModel, Scene};
pub use space::{CostTriple, EdgeFactor, FactoredPath, FactoredSpace, GoalSpec, JointKind, State};
