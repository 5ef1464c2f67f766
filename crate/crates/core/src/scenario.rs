//! Scenario files: a declarative TOML description of a planning problem.
//!
//! ```toml
//! schema = 1
//!
//! [meta]
//! name = "fig3-toy"
//! best_known_actions = 2
//! source = "paper"          # or "derived"
//! time_budget_s = 10.0
//!
//! [space]
//! dims = 2
//! factors = [[0], [1]]      # 0-based joint indices
//! bounds = [[0.0, 3.0], [0.0, 1.0]]
//! weights = [1.0, 1.0]      # optional, default 1
//! names = ["cube_x", "blocker_y"]   # optional
//!
//! [[bodies]]
//! name = "cube"
//! half_extents = [0.2, 0.2]
//! pose = [0.0, 0.0, 0.0]    # x, y, theta; optional
//! kind = "movable"          # or "static"
//!
//! [[bindings]]
//! body = "cube"
//! joints = [{ index = 0, type = "prismatic", axis = [1.0, 0.0] }]
//! # revolute joints take `anchor = [x, y]` instead of `axis`
//!
//! [start]
//! values = [0.0, 0.0]
//!
//! [goal]
//! indices = [0]
//! values = [3.0]
//! epsilon = 0.01
//!
//! [collision]               # optional
//! ignore = [["door", "frame"]]
//! resolution = 0.01
//!
//! [oracle]                  # optional lattice step per joint
//! resolution = [0.375, 0.125]
//!
//! [planner]                 # optional overrides
//! max_extend_distance = 1.0
//! ```
//!
//! Joint kinds are taken from the bindings. Errors carry the line number of
//! the offending entry.

use std::fmt;
use std::ops::Range;
use std::path::Path;

use serde::Deserialize;
use toml::Spanned;

use crate::error::{Error, Result};
use crate::geometry::{Pose, Vec2};
use crate::planner::PlannerConfig;
use crate::scene::{Body, BodyKind, JointBinding, JointModel, Scene};
use crate::space::{FactoredSpace, GoalSpec, JointKind, State};

pub const SCHEMA_VERSION: i64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    /// The best-known action count is stated for the original environment.
    Paper,
    /// The best-known action count was established for this replica only.
    Derived,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Paper => "paper",
            Source::Derived => "derived",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioMeta {
    pub name: String,
    pub best_known_actions: u32,
    pub source: Source,
    pub time_budget_s: f64,
    pub description: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub meta: ScenarioMeta,
    pub scene: Scene,
    pub start: State,
    pub goal: GoalSpec,
    pub joint_names: Vec<String>,
    /// Lattice step per joint for the oracle, if the file sets one.
    pub oracle_resolution: Option<Vec<f64>>,
    pub max_extend_distance: Option<f64>,
    pub max_goal_samples: Option<usize>,
}

impl Scenario {
    /// Planner configuration with this scenario's overrides and time budget.
    pub fn planner_config(&self, seed: u64) -> PlannerConfig {
        let mut cfg = PlannerConfig {
            seed,
            time_budget_s: self.meta.time_budget_s,
            max_extend_distance: self.max_extend_distance,
            ..PlannerConfig::default()
        };
        if let Some(k) = self.max_goal_samples {
            cfg.max_goal_samples = k;
        }
        cfg
    }

    /// The oracle lattice step: the file's override or the default.
    pub fn oracle_resolution(&self) -> Vec<f64> {
        self.oracle_resolution
            .clone()
            .unwrap_or_else(|| crate::oracle::default_resolution(self.scene.space()))
    }
}

const BUILTIN: &[(&str, &str)] = &[
    ("fig3-toy", include_str!("../scenarios/fig3-toy.toml")),
    ("start-in-goal", include_str!("../scenarios/start-in-goal.toml")),
    ("maze-3-doors", include_str!("../scenarios/maze-3-doors.toml")),
    ("maze-slider-obstacle", include_str!("../scenarios/maze-slider-obstacle.toml")),
    ("maze-4-sliders", include_str!("../scenarios/maze-4-sliders.toml")),
    ("maze-vertical", include_str!("../scenarios/maze-vertical.toml")),
    ("escape-room-1", include_str!("../scenarios/escape-room-1.toml")),
    ("escape-room-2", include_str!("../scenarios/escape-room-2.toml")),
];

/// The four maze replicas.
pub const MAZES: &[&str] = &["maze-3-doors", "maze-slider-obstacle", "maze-4-sliders", "maze-vertical"];

/// The two escape-room replicas.
pub const ESCAPE_ROOMS: &[&str] = &["escape-room-1", "escape-room-2"];

pub fn builtin_names() -> Vec<&'static str> {
    BUILTIN.iter().map(|(n, _)| *n).collect()
}

pub fn builtin_source(name: &str) -> Option<&'static str> {
    BUILTIN.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Loads a built-in scenario by name, or else a scenario file by path.
pub fn load_scenario(name_or_path: &str) -> Result<Scenario> {
    if let Some(text) = builtin_source(name_or_path) {
        return parse_scenario(text, name_or_path);
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        return Err(Error::UnknownScenario(name_or_path.to_string()));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text, name_or_path)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    schema: Spanned<i64>,
    meta: RawMeta,
    space: RawSpace,
    #[serde(default)]
    bodies: Vec<Spanned<RawBody>>,
    #[serde(default)]
    bindings: Vec<Spanned<RawBinding>>,
    start: RawStart,
    goal: RawGoal,
    collision: Option<RawCollision>,
    oracle: Option<RawOracle>,
    planner: Option<RawPlanner>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeta {
    name: String,
    best_known_actions: u32,
    source: Source,
    time_budget_s: Spanned<f64>,
    description: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpace {
    dims: Spanned<usize>,
    factors: Spanned<Vec<Spanned<Vec<usize>>>>,
    bounds: Spanned<Vec<Spanned<[f64; 2]>>>,
    weights: Option<Spanned<Vec<f64>>>,
    names: Option<Spanned<Vec<String>>>,
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawKind {
    Static,
    Movable,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBody {
    name: String,
    half_extents: [f64; 2],
    #[serde(default)]
    pose: [f64; 3],
    kind: RawKind,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBinding {
    body: String,
    joints: Vec<Spanned<RawJoint>>,
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum RawJoint {
    Prismatic { index: usize, axis: [f64; 2] },
    Revolute { index: usize, anchor: [f64; 2] },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStart {
    values: Spanned<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGoal {
    indices: Spanned<Vec<usize>>,
    values: Vec<f64>,
    epsilon: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCollision {
    #[serde(default)]
    ignore: Vec<Spanned<[String; 2]>>,
    resolution: Option<Spanned<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOracle {
    resolution: Spanned<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlanner {
    max_extend_distance: Option<Spanned<f64>>,
    max_goal_samples: Option<Spanned<usize>>,
}

struct Ctx<'a> {
    text: &'a str,
    source: &'a str,
}

impl Ctx<'_> {
    fn line(&self, offset: usize) -> usize {
        self.text[..offset.min(self.text.len())].matches('\n').count() + 1
    }

    fn err(&self, span: Range<usize>, message: impl Into<String>) -> Error {
        Error::Scenario {
            source_name: self.source.to_string(),
            line: self.line(span.start),
            message: message.into(),
        }
    }

    /// Re-anchors a constructor error at `span`.
    fn wrap(&self, span: Range<usize>, e: Error) -> Error {
        let message = match e {
            Error::InvalidSpace(m) | Error::InvalidGoal(m) | Error::InvalidScene(m) => m,
            other => other.to_string(),
        };
        self.err(span, message)
    }
}

/// Parses scenario text. `source_name` labels error messages.
pub fn parse_scenario(text: &str, source_name: &str) -> Result<Scenario> {
    let ctx = Ctx {
        text,
        source: source_name,
    };
    let raw: RawFile = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| ctx.line(s.start)).unwrap_or(1);
        Error::Scenario {
            source_name: source_name.to_string(),
            line,
            message: e.message().trim().to_string(),
        }
    })?;
    if *raw.schema.get_ref() != SCHEMA_VERSION {
        return Err(ctx.err(
            raw.schema.span(),
            format!("unsupported schema {}, expected {SCHEMA_VERSION}", raw.schema.get_ref()),
        ));
    }

    let space_raw = &raw.space;
    let n = *space_raw.dims.get_ref();
    if n == 0 {
        return Err(ctx.err(space_raw.dims.span(), "dims must be at least 1"));
    }
    check_partition(&ctx, &space_raw.factors, n)?;
    let bounds: Vec<(f64, f64)> = space_raw.bounds.get_ref().iter().map(|b| (b.get_ref()[0], b.get_ref()[1])).collect();
    if bounds.len() != n {
        return Err(ctx.err(
            space_raw.bounds.span(),
            format!("{} bounds for {n} dimensions", bounds.len()),
        ));
    }
    for b in space_raw.bounds.get_ref() {
        let [lo, hi] = *b.get_ref();
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(ctx.err(b.span(), format!("bounds [{lo}, {hi}] need lo < hi")));
        }
    }
    let factors: Vec<Vec<usize>> = space_raw.factors.get_ref().iter().map(|f| f.get_ref().clone()).collect();
    let mut space =
        FactoredSpace::new(factors, bounds).map_err(|e| ctx.wrap(space_raw.factors.span(), e))?;
    if let Some(w) = &space_raw.weights {
        space = space
            .with_weights(w.get_ref().clone())
            .map_err(|e| ctx.wrap(w.span(), e))?;
    }
    let joint_names = match &space_raw.names {
        Some(names) if names.get_ref().len() != n => {
            return Err(ctx.err(names.span(), format!("{} names for {n} dimensions", names.get_ref().len())));
        }
        Some(names) => names.get_ref().clone(),
        None => (0..n).map(|i| format!("q{i}")).collect(),
    };

    let mut bodies = Vec::with_capacity(raw.bodies.len());
    for b in &raw.bodies {
        let r = b.get_ref();
        if bodies.iter().any(|x: &Body| x.name == r.name) {
            return Err(ctx.err(b.span(), format!("duplicate body name `{}`", r.name)));
        }
        let kind = match r.kind {
            RawKind::Static => BodyKind::Static,
            RawKind::Movable => BodyKind::Movable,
        };
        let pose = Pose::new(r.pose[0], r.pose[1], r.pose[2]);
        bodies.push(Body::new(r.name.clone(), (r.half_extents[0], r.half_extents[1]), pose, kind));
    }
    let body_index = |name: &str, span: Range<usize>| {
        bodies
            .iter()
            .position(|b| b.name == name)
            .ok_or_else(|| ctx.err(span, format!("unknown body `{name}`")))
    };

    let mut kinds = vec![JointKind::Prismatic; n];
    let mut bindings = Vec::with_capacity(raw.bindings.len());
    for b in &raw.bindings {
        let body = body_index(&b.get_ref().body, b.span())?;
        let mut joints = Vec::new();
        for j in &b.get_ref().joints {
            let (index, model) = match *j.get_ref() {
                RawJoint::Prismatic { index, axis } => (
                    index,
                    JointModel::Prismatic {
                        axis: Vec2::new(axis[0], axis[1]),
                    },
                ),
                RawJoint::Revolute { index, anchor } => (
                    index,
                    JointModel::Revolute {
                        anchor: Vec2::new(anchor[0], anchor[1]),
                    },
                ),
            };
            if index >= n {
                return Err(ctx.err(j.span(), format!("joint index {index} out of range for {n} dimensions")));
            }
            if matches!(model, JointModel::Revolute { .. }) {
                kinds[index] = JointKind::Revolute;
            }
            joints.push((index, model));
        }
        bindings.push(JointBinding { body, joints });
    }
    let space = space.with_kinds(kinds)?;

    let mut ignore = Vec::new();
    if let Some(c) = &raw.collision {
        for pair in &c.ignore {
            let [a, b] = pair.get_ref();
            ignore.push((body_index(a, pair.span())?, body_index(b, pair.span())?));
        }
    }
    let whole = 0..text.len().min(1);
    let bindings_span = raw.bindings.first().map(|b| b.span()).unwrap_or(whole.clone());
    let mut scene = Scene::new(space, bodies, bindings, &ignore).map_err(|e| ctx.wrap(bindings_span, e))?;
    if let Some(res) = raw.collision.as_ref().and_then(|c| c.resolution.as_ref()) {
        scene = scene
            .with_resolution(*res.get_ref())
            .map_err(|e| ctx.wrap(res.span(), e))?;
    }

    let start_values = &raw.start.values;
    if start_values.get_ref().len() != n {
        return Err(ctx.err(
            start_values.span(),
            format!("start has {} values, space has {n} dimensions", start_values.get_ref().len()),
        ));
    }
    let start = State::new(start_values.get_ref().clone());
    if !scene.space().contains(&start) {
        return Err(ctx.err(start_values.span(), "start is out of bounds"));
    }
    if !scene.is_state_valid(&start) {
        let names: Vec<String> = scene
            .colliding_pairs(&start)
            .iter()
            .map(|&(a, b)| format!("{}/{}", scene.bodies()[a].name, scene.bodies()[b].name))
            .collect();
        return Err(ctx.err(
            start_values.span(),
            format!("start is in collision: {}", names.join(", ")),
        ));
    }

    let g = &raw.goal;
    let goal = GoalSpec::new(scene.space(), g.indices.get_ref().clone(), g.values.clone(), g.epsilon)
        .map_err(|e| ctx.wrap(g.indices.span(), e))?;

    let oracle_resolution = match &raw.oracle {
        Some(o) => {
            let r = o.resolution.get_ref();
            if r.len() != n || r.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(ctx.err(
                    o.resolution.span(),
                    format!("oracle resolution needs {n} positive steps"),
                ));
            }
            Some(r.clone())
        }
        None => None,
    };

    let budget = *raw.meta.time_budget_s.get_ref();
    if !(budget.is_finite() && budget > 0.0) {
        return Err(ctx.err(raw.meta.time_budget_s.span(), "time_budget_s must be positive"));
    }
    let (max_extend_distance, max_goal_samples) = match &raw.planner {
        Some(p) => {
            if let Some(d) = &p.max_extend_distance {
                if !(d.get_ref().is_finite() && *d.get_ref() > 0.0) {
                    return Err(ctx.err(d.span(), "max_extend_distance must be positive"));
                }
            }
            if let Some(k) = &p.max_goal_samples {
                if *k.get_ref() == 0 {
                    return Err(ctx.err(k.span(), "max_goal_samples must be at least 1"));
                }
            }
            (
                p.max_extend_distance.as_ref().map(|d| *d.get_ref()),
                p.max_goal_samples.as_ref().map(|k| *k.get_ref()),
            )
        }
        None => (None, None),
    };

    Ok(Scenario {
        meta: ScenarioMeta {
            name: raw.meta.name,
            best_known_actions: raw.meta.best_known_actions,
            source: raw.meta.source,
            time_budget_s: budget,
            description: raw.meta.description,
        },
        scene,
        start,
        goal,
        joint_names,
        oracle_resolution,
        max_extend_distance,
        max_goal_samples,
    })
}

/// Partition checks with per-factor line numbers.
fn check_partition(ctx: &Ctx<'_>, factors: &Spanned<Vec<Spanned<Vec<usize>>>>, n: usize) -> Result<()> {
    if factors.get_ref().is_empty() {
        return Err(ctx.err(factors.span(), "no factors"));
    }
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for (f, members) in factors.get_ref().iter().enumerate() {
        if members.get_ref().is_empty() {
            return Err(ctx.err(members.span(), format!("factor {f} is empty")));
        }
        for &i in members.get_ref() {
            if i >= n {
                return Err(ctx.err(
                    members.span(),
                    format!("factor {f} references index {i}, space has {n} dimensions"),
                ));
            }
            if let Some(g) = owner[i] {
                return Err(ctx.err(
                    members.span(),
                    format!("index {i} appears in factor {g} and factor {f}"),
                ));
            }
            owner[i] = Some(f);
        }
    }
    if let Some(i) = owner.iter().position(Option::is_none) {
        return Err(ctx.err(factors.span(), format!("index {i} is in no factor")));
    }
    Ok(())
}
