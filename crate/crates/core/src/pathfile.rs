//! Text serialization of factored paths and independent path verification.
//!
//! ```text
//! larrt-path 1
//! dim 2
//! s 0 0
//! e 1
//! s 0 1
//! e 0
//! s 3 1
//! ```
//!
//! `s` lines hold one state each; the `e` line between two states names the
//! factor the edge moves (`*` for an edge that moves several). Values are
//! written in shortest round-trip form, so parsing a written path gives the
//! same bits back. Blank lines and `#` comments are ignored.

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scene::Scene;
use crate::space::{CostTriple, EdgeFactor, FactoredPath, GoalSpec, State};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "larrt-path";

pub fn format_path(path: &FactoredPath) -> String {
    let mut out = String::new();
    let dim = path.start().len();
    writeln!(out, "{MAGIC} {FORMAT_VERSION}").unwrap();
    writeln!(out, "dim {dim}").unwrap();
    for (k, s) in path.states().iter().enumerate() {
        if k > 0 {
            match path.edges()[k - 1] {
                EdgeFactor::Single(f) => writeln!(out, "e {f}").unwrap(),
                EdgeFactor::Multi => writeln!(out, "e *").unwrap(),
            }
        }
        out.push('s');
        for v in s.values() {
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_path(text: &str) -> Result<FactoredPath> {
    let err = |line: usize, message: String| Error::PathFormat { line, message };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (ln, header) = lines.next().ok_or_else(|| err(1, "empty path file".into()))?;
    match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        [MAGIC, v] if v.parse::<u32>() == Ok(FORMAT_VERSION) => {}
        [MAGIC, v] => return Err(err(ln, format!("unsupported version `{v}`"))),
        _ => return Err(err(ln, format!("expected `{MAGIC} {FORMAT_VERSION}`"))),
    }
    let (ln, dim_line) = lines.next().ok_or_else(|| err(ln, "missing `dim` line".into()))?;
    let dim: usize = match dim_line.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["dim", n] => n.parse().map_err(|_| err(ln, format!("bad dimension `{n}`")))?,
        _ => return Err(err(ln, "expected `dim <n>`".into())),
    };

    let mut states: Vec<State> = Vec::new();
    let mut edges = Vec::new();
    let mut pending_edge: Option<EdgeFactor> = None;
    let mut last_line = ln;
    for (ln, line) in lines {
        last_line = ln;
        let mut words = line.split_whitespace();
        match words.next() {
            Some("s") => {
                let values = words
                    .map(|w| w.parse::<f64>().map_err(|_| err(ln, format!("bad number `{w}`"))))
                    .collect::<Result<Vec<_>>>()?;
                if values.len() != dim {
                    return Err(err(ln, format!("state has {} values, expected {dim}", values.len())));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(err(ln, "non-finite value".into()));
                }
                if !states.is_empty() {
                    let e = pending_edge.take().ok_or_else(|| err(ln, "missing `e` line between states".into()))?;
                    edges.push(e);
                }
                states.push(State::new(values));
            }
            Some("e") => {
                if states.is_empty() {
                    return Err(err(ln, "edge before the first state".into()));
                }
                if pending_edge.is_some() {
                    return Err(err(ln, "two `e` lines in a row".into()));
                }
                let e = match (words.next(), words.next()) {
                    (Some("*"), None) => EdgeFactor::Multi,
                    (Some(w), None) => EdgeFactor::Single(w.parse().map_err(|_| err(ln, format!("bad factor `{w}`")))?),
                    _ => return Err(err(ln, "expected `e <factor>` or `e *`".into())),
                };
                pending_edge = Some(e);
            }
            _ => return Err(err(ln, format!("unrecognised line `{line}`"))),
        }
    }
    if pending_edge.is_some() {
        return Err(err(last_line, "trailing edge without a target state".into()));
    }
    if states.is_empty() {
        return Err(err(last_line, "path has no states".into()));
    }
    Ok(FactoredPath::from_parts(states, edges))
}

pub fn save_path(file: &Path, path: &FactoredPath) -> Result<()> {
    std::fs::write(file, format_path(path)).map_err(|e| Error::io(file, e))
}

pub fn load_path(file: &Path) -> Result<FactoredPath> {
    let text = std::fs::read_to_string(file).map_err(|e| Error::io(file, e))?;
    parse_path(&text)
}

/// Why a path failed verification. Edge indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub enum VerifyFailure {
    Dimension { expected: usize, got: usize },
    StartMismatch,
    InvalidState { state: usize },
    Annotation { edge: usize },
    NotIsolated { edge: usize },
    InvalidEdge { edge: usize },
    GoalMiss,
}

impl fmt::Display for VerifyFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyFailure::Dimension { expected, got } => {
                write!(f, "path has dimension {got}, scenario has {expected}")
            }
            VerifyFailure::StartMismatch => f.write_str("path does not begin at the scenario start"),
            VerifyFailure::InvalidState { state } => {
                write!(f, "state {state} is out of bounds or in collision")
            }
            VerifyFailure::Annotation { edge } => {
                write!(f, "edge {edge}: annotation does not match the factor that moves")
            }
            VerifyFailure::NotIsolated { edge } => write!(f, "edge {edge} moves more than one factor"),
            VerifyFailure::InvalidEdge { edge } => write!(f, "edge {edge} is in collision"),
            VerifyFailure::GoalMiss => f.write_str("goal miss: the final state is outside the goal region"),
        }
    }
}

impl std::error::Error for VerifyFailure {}

/// Replays `path` from `start`: every state in bounds and collision-free,
/// every edge a single-factor motion that is collision-free, the end in the
/// goal. Returns the path's cost.
pub fn verify_path(
    scene: &Scene,
    start: &[f64],
    goal: &GoalSpec,
    path: &FactoredPath,
) -> std::result::Result<CostTriple, VerifyFailure> {
    let space = scene.space();
    let got = path.start().len();
    if got != space.dim() {
        return Err(VerifyFailure::Dimension {
            expected: space.dim(),
            got,
        });
    }
    if path.start().values() != start {
        return Err(VerifyFailure::StartMismatch);
    }
    for (k, s) in path.states().iter().enumerate() {
        if !space.contains(s) || !scene.is_state_valid(s) {
            return Err(VerifyFailure::InvalidState { state: k });
        }
    }
    for (k, pair) in path.states().windows(2).enumerate() {
        let changed = space.changed_factors(&pair[0], &pair[1]);
        if changed.len() > 1 {
            return Err(VerifyFailure::NotIsolated { edge: k });
        }
        let annotated = path.edges()[k].single();
        if annotated.is_none() || changed.first().copied() != annotated {
            return Err(VerifyFailure::Annotation { edge: k });
        }
        if !scene.is_edge_valid(&pair[0], &pair[1]) {
            return Err(VerifyFailure::InvalidEdge { edge: k });
        }
    }
    if !goal.contains(path.end()) {
        return Err(VerifyFailure::GoalMiss);
    }
    Ok(path.cost(space).expect("isolation checked above"))
}
