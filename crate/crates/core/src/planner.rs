//! The less-actions bi-directional planner.
//!
//! A start tree and a goal tree (with up to `max_goal_samples` roots sampled in
//! the goal region) are grown alternately. Every extension is split into
//! single-factor edges, and each candidate solution is defragmented before it
//! is compared with the best path so far. Planning is anytime: it continues
//! until the termination condition fires.

use std::ops::Range;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::defrag;
use crate::error::{Error, Result};
use crate::nn::KdTree;
use crate::scene::Scene;
use crate::space::{CostTriple, FactoredPath, FactoredSpace, GoalSpec, State};

/// Goal samples are drawn at most this many times per goal root before giving up.
pub const GOAL_ATTEMPTS_PER_ROOT: usize = 100;

/// Edges changing more factors than this are isolated.
pub const K_MIN_ACTION_COST: usize = 1;

/// Source of the elapsed time used for budgets and cost traces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Clock {
    Wall,
    /// Time advances by `1 / iterations_per_second` per iteration, which makes
    /// runs (including their traces) reproducible bit for bit.
    Virtual { iterations_per_second: f64 },
}

#[derive(Debug, Clone)]
pub struct PlannerConfig {
    /// Maximum number of goal-tree roots (K).
    pub max_goal_samples: usize,
    /// Steering range. `None` uses half the mean weighted per-dimension range.
    pub max_extend_distance: Option<f64>,
    pub time_budget_s: f64,
    pub max_iterations: Option<u64>,
    /// Stop as soon as the best path has at most this many actions.
    pub stop_at_actions: Option<u32>,
    pub clock: Clock,
    pub seed: u64,
    /// Probability of sampling the goal region (RRT* only).
    pub goal_bias: f64,
    /// Multiplier on the RRT* neighbourhood radius constant.
    pub rewire_factor: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            max_goal_samples: 10,
            max_extend_distance: None,
            time_budget_s: 30.0,
            max_iterations: None,
            stop_at_actions: None,
            clock: Clock::Wall,
            seed: 0,
            goal_bias: 0.05,
            rewire_factor: 1.1,
        }
    }
}

impl PlannerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_budget(mut self, seconds: f64) -> Self {
        self.time_budget_s = seconds;
        self
    }

    pub fn extend_distance(&self, space: &FactoredSpace) -> f64 {
        self.max_extend_distance
            .unwrap_or_else(|| 0.5 * space.mean_weighted_range())
    }

    pub(crate) fn validate(&self, space: &FactoredSpace) -> Result<()> {
        if self.max_goal_samples == 0 {
            return Err(Error::InvalidGoal("max_goal_samples must be at least 1".into()));
        }
        let d = self.extend_distance(space);
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::InvalidSpace(format!(
                "max extend distance must be positive, got {d}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationReason {
    StartInGoal,
    CostThreshold,
    FirstSolution,
    TimeBudget,
    MaxIterations,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub time_s: f64,
    pub cost: CostTriple,
    /// Scalar objective of additive planners at this point, if any.
    pub scalar: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PlanResult {
    pub best_path: Option<FactoredPath>,
    pub best_cost: Option<CostTriple>,
    pub cost_trace: Vec<TraceEntry>,
    pub iterations: u64,
    pub termination: TerminationReason,
    pub time_to_first_s: Option<f64>,
    pub elapsed_s: f64,
}

impl PlanResult {
    pub(crate) fn start_in_goal(start: &[f64]) -> Self {
        PlanResult {
            best_path: Some(FactoredPath::single(State::from(start))),
            best_cost: Some(CostTriple::ZERO),
            cost_trace: vec![TraceEntry {
                time_s: 0.0,
                cost: CostTriple::ZERO,
                scalar: Some(0.0),
            }],
            iterations: 0,
            termination: TerminationReason::StartInGoal,
            time_to_first_s: Some(0.0),
            elapsed_s: 0.0,
        }
    }

    pub fn solved(&self) -> bool {
        self.best_path.is_some()
    }
}

pub(crate) struct Stopwatch {
    clock: Clock,
    start: Instant,
}

impl Stopwatch {
    pub(crate) fn new(clock: Clock) -> Self {
        Stopwatch {
            clock,
            start: Instant::now(),
        }
    }

    pub(crate) fn elapsed(&self, iterations: u64) -> f64 {
        match self.clock {
            Clock::Wall => self.start.elapsed().as_secs_f64(),
            Clock::Virtual {
                iterations_per_second,
            } => iterations as f64 / iterations_per_second,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TreeNode {
    pub state: State,
    pub parent: Option<usize>,
    /// Factor moved by the edge from the parent.
    pub edge_factor: Option<usize>,
    /// Cost of the tree path from the root to this node.
    pub cost: CostTriple,
}

#[derive(Debug, Clone)]
pub struct Tree {
    nodes: Vec<TreeNode>,
    index: KdTree,
    roots: Vec<usize>,
}

impl Tree {
    pub fn new(dim: usize) -> Self {
        Tree {
            nodes: Vec::new(),
            index: KdTree::new(dim),
            roots: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &TreeNode {
        &self.nodes[i]
    }

    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    pub fn add_root(&mut self, state: State) -> usize {
        let id = self.index.insert(&state);
        self.nodes.push(TreeNode {
            state,
            parent: None,
            edge_factor: None,
            cost: CostTriple::ZERO,
        });
        self.roots.push(id);
        id
    }

    fn add_child(&mut self, space: &FactoredSpace, parent: usize, state: State, factor: usize) -> usize {
        let p = &self.nodes[parent];
        let mut cost = p.cost;
        if p.edge_factor != Some(factor) {
            cost.actions += 1;
        }
        cost.additive += 1;
        cost.dist += space.factor_distance(factor, &p.state, &state);
        let id = self.index.insert(&state);
        self.nodes.push(TreeNode {
            state,
            parent: Some(parent),
            edge_factor: Some(factor),
            cost,
        });
        id
    }

    pub fn nearest(&self, space: &FactoredSpace, q: &[f64]) -> Option<(usize, f64)> {
        self.index.nearest(space, q)
    }

    /// Node ids from `i` up to its root, inclusive.
    pub fn branch(&self, i: usize) -> Vec<usize> {
        let mut out = vec![i];
        let mut cur = i;
        while let Some(p) = self.nodes[cur].parent {
            out.push(p);
            cur = p;
        }
        out
    }

    /// Checks that every edge changes exactly its annotated factor and is
    /// motion-valid, and that every node leads back to a root.
    pub fn audit(&self, scene: &Scene) -> std::result::Result<(), String> {
        let space = scene.space();
        for (i, n) in self.nodes.iter().enumerate() {
            match (n.parent, n.edge_factor) {
                (None, None) => {
                    if !self.roots.contains(&i) {
                        return Err(format!("node {i} has no parent but is not a root"));
                    }
                    if !scene.is_state_valid(&n.state) {
                        return Err(format!("root {i} is invalid"));
                    }
                }
                (Some(p), Some(f)) => {
                    if p >= i {
                        return Err(format!("node {i} has a later parent {p}"));
                    }
                    let parent = &self.nodes[p].state;
                    if space.changed_factors(parent, &n.state) != [f] {
                        return Err(format!("edge {p}->{i} does not change exactly factor {f}"));
                    }
                    if !scene.is_edge_valid(parent, &n.state) {
                        return Err(format!("edge {p}->{i} is not motion-valid"));
                    }
                }
                _ => return Err(format!("node {i} has an inconsistent parent link")),
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtendStatus {
    Reached,
    Advanced,
    Trapped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtendOutcome {
    pub status: ExtendStatus,
    /// The last node of the extension, or the nearest node when nothing was added.
    pub node: usize,
    /// Ids of the nodes added by this extension.
    pub added: Range<usize>,
}

/// Splits the transition `from -> to` into one state per changed factor, in
/// `order`. State `k` has the first `k + 1` changed factors at `to` values.
pub fn isolate_transition(space: &FactoredSpace, from: &[f64], to: &[f64], order: &[usize]) -> Vec<State> {
    let changed = space.changed_factors(from, to);
    let mut cur = State::from(from);
    let mut out = Vec::with_capacity(changed.len());
    for &f in order {
        if changed.contains(&f) {
            cur.assign_factor(space, f, to);
            out.push(cur.clone());
        }
    }
    out
}

/// Extends `tree` toward `x_rand` by at most `max_dist`, isolating the motion
/// into single-factor edges. The whole chain is added or nothing is.
pub fn extend<R: Rng + ?Sized>(
    tree: &mut Tree,
    scene: &Scene,
    x_rand: &[f64],
    max_dist: f64,
    rng: &mut R,
) -> ExtendOutcome {
    let space = scene.space();
    let (near, d) = tree.nearest(space, x_rand).expect("extend on an empty tree");
    let first = tree.len();
    let none_added = |status| ExtendOutcome {
        status,
        node: near,
        added: first..first,
    };
    if d == 0.0 {
        return none_added(ExtendStatus::Reached);
    }
    let order = space.random_order(rng);
    let x_near = tree.nodes[near].state.clone();
    let mut x_new = if d > max_dist {
        space.interpolate(&x_near, x_rand, max_dist / d, &order)
    } else {
        State::from(x_rand)
    };
    // Factors whose change is below tolerance are snapped back so that every
    // stored edge changes exactly its annotated factor.
    let changed = space.changed_factors(&x_near, &x_new);
    for f in 0..space.num_factors() {
        if !changed.contains(&f) {
            x_new.assign_factor(space, f, &x_near);
        }
    }
    let status = if d > max_dist {
        ExtendStatus::Advanced
    } else {
        ExtendStatus::Reached
    };
    if changed.is_empty() {
        return none_added(status);
    }
    if !scene.is_motion_valid(&x_near, &x_new, &order) {
        return none_added(ExtendStatus::Trapped);
    }
    let chain = if changed.len() > K_MIN_ACTION_COST {
        isolate_transition(space, &x_near, &x_new, &order)
    } else {
        vec![x_new]
    };
    // The full motion was validated above; its factor-boundary waypoints are
    // exactly the chain states, so each isolated edge is valid too.
    let mut parent = near;
    let mut prev = x_near;
    for s in chain {
        let f = space.changed_factors(&prev, &s)[0];
        prev = s.clone();
        parent = tree.add_child(space, parent, s, f);
    }
    ExtendOutcome {
        status,
        node: parent,
        added: first..tree.len(),
    }
}

/// Repeated extension toward `target` until reached or trapped.
pub fn connect<R: Rng + ?Sized>(
    tree: &mut Tree,
    scene: &Scene,
    target: &[f64],
    max_dist: f64,
    rng: &mut R,
) -> ExtendOutcome {
    let first = tree.len();
    loop {
        let out = extend(tree, scene, target, max_dist, rng);
        if out.status != ExtendStatus::Advanced {
            return ExtendOutcome {
                added: first..tree.len(),
                ..out
            };
        }
    }
}

/// Behaviour switches shared by this planner and the RRT-Connect baseline.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SearchMode {
    pub defragment: bool,
    /// Connect after every non-trapped extension, not only after reaching.
    pub connect_on_advance: bool,
    pub stop_at_first: bool,
}

pub(crate) struct BiSearch<'a> {
    scene: &'a Scene,
    goal: &'a GoalSpec,
    cfg: &'a PlannerConfig,
    mode: SearchMode,
    rng: ChaCha8Rng,
    trees: [Tree; 2],
    max_dist: f64,
    best: Option<(FactoredPath, CostTriple)>,
    trace: Vec<TraceEntry>,
    time_to_first: Option<f64>,
}

impl<'a> BiSearch<'a> {
    pub(crate) fn new(
        scene: &'a Scene,
        start: &[f64],
        goal: &'a GoalSpec,
        cfg: &'a PlannerConfig,
        mode: SearchMode,
    ) -> Result<Self> {
        let space = scene.space();
        space.check_dim(start)?;
        cfg.validate(space)?;
        if !scene.is_state_valid(start) {
            return Err(Error::InvalidStart);
        }
        let mut trees = [Tree::new(space.dim()), Tree::new(space.dim())];
        trees[0].add_root(State::from(start));
        Ok(BiSearch {
            scene,
            goal,
            cfg,
            mode,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            trees,
            max_dist: cfg.extend_distance(space),
            best: None,
            trace: Vec::new(),
            time_to_first: None,
        })
    }

    pub(crate) fn trees(&self) -> &[Tree; 2] {
        &self.trees
    }

    fn sample_goal_root(&mut self, attempts: usize) -> bool {
        let space = self.scene.space();
        for _ in 0..attempts {
            let g = space.sample_goal(self.goal, &mut self.rng);
            if self.scene.is_state_valid(&g) {
                self.trees[1].add_root(g);
                return true;
            }
        }
        false
    }

    pub(crate) fn run(&mut self) -> Result<PlanResult> {
        let watch = Stopwatch::new(self.cfg.clock);
        let start = self.trees[0].node(0).state.clone();
        if self.goal.contains(&start) {
            return Ok(PlanResult::start_in_goal(&start));
        }
        let k = self.cfg.max_goal_samples;
        if !self.sample_goal_root(GOAL_ATTEMPTS_PER_ROOT * k) {
            return Err(Error::NoValidGoalSample {
                attempts: GOAL_ATTEMPTS_PER_ROOT * k,
            });
        }

        let mut iterations = 0u64;
        let mut active = 0usize;
        let termination = loop {
            let now = watch.elapsed(iterations);
            if now >= self.cfg.time_budget_s {
                break TerminationReason::TimeBudget;
            }
            if self.cfg.max_iterations.is_some_and(|m| iterations >= m) {
                break TerminationReason::MaxIterations;
            }
            iterations += 1;

            let roots = self.trees[1].roots().len();
            if roots < k && roots < self.trees[1].len() / 2 {
                self.sample_goal_root(1);
            }

            let x_rand = self.scene.space().sample_uniform(&mut self.rng);
            let out = extend(&mut self.trees[active], self.scene, &x_rand, self.max_dist, &mut self.rng);
            let mut candidates = Vec::new();
            if out.status != ExtendStatus::Trapped {
                if active == 0 {
                    self.goal_candidates(out.added.clone(), &mut candidates);
                }
                if out.status == ExtendStatus::Reached || self.mode.connect_on_advance {
                    let other = 1 - active;
                    let target = self.trees[active].node(out.node).state.clone();
                    let joined = connect(&mut self.trees[other], self.scene, &target, self.max_dist, &mut self.rng);
                    if other == 0 {
                        self.goal_candidates(joined.added.clone(), &mut candidates);
                    }
                    if joined.status == ExtendStatus::Reached {
                        let (a, b) = if active == 0 {
                            (out.node, joined.node)
                        } else {
                            (joined.node, out.node)
                        };
                        candidates.push(self.joined_path(a, b));
                    }
                }
            }
            let now = watch.elapsed(iterations);
            let mut stop = None;
            for path in candidates {
                if self.consider(path, now) {
                    if self.mode.stop_at_first {
                        stop = Some(TerminationReason::FirstSolution);
                    }
                    let actions = self.best.as_ref().map(|(_, c)| c.actions);
                    if let (Some(limit), Some(a)) = (self.cfg.stop_at_actions, actions) {
                        if a <= limit {
                            stop = Some(TerminationReason::CostThreshold);
                        }
                    }
                }
                if stop.is_some() {
                    break;
                }
            }
            if let Some(reason) = stop {
                break reason;
            }
            active = 1 - active;
        };

        let (best_path, best_cost) = match self.best.take() {
            Some((p, c)) => (Some(p), Some(c)),
            None => (None, None),
        };
        Ok(PlanResult {
            best_path,
            best_cost,
            cost_trace: std::mem::take(&mut self.trace),
            iterations,
            termination,
            time_to_first_s: self.time_to_first,
            elapsed_s: watch.elapsed(iterations),
        })
    }

    /// Start-tree nodes entering the goal region yield root-to-node paths.
    fn goal_candidates(&self, added: Range<usize>, out: &mut Vec<FactoredPath>) {
        let tree = &self.trees[0];
        for i in added {
            let n = tree.node(i);
            let parent_in_goal = n.parent.is_some_and(|p| self.goal.contains(&tree.node(p).state));
            if !parent_in_goal && self.goal.contains(&n.state) {
                out.push(self.branch_path(i));
            }
        }
    }

    fn branch_path(&self, i: usize) -> FactoredPath {
        let tree = &self.trees[0];
        let mut ids = tree.branch(i);
        ids.reverse();
        let states = ids.into_iter().map(|k| tree.node(k).state.clone()).collect();
        FactoredPath::from_states(self.scene.space(), states)
    }

    /// Start root to start-tree node `a`, then goal-tree node `b` to its root.
    fn joined_path(&self, a: usize, b: usize) -> FactoredPath {
        let space = self.scene.space();
        let mut path = self.branch_path(a);
        for k in self.trees[1].branch(b) {
            path.push_state(space, self.trees[1].node(k).state.clone());
        }
        path
    }

    /// Trims, optionally defragments and scores a candidate; returns whether
    /// it became the new best.
    fn consider(&mut self, mut path: FactoredPath, now: f64) -> bool {
        if !path.truncate_at_goal(self.goal) || !path.is_isolated() {
            return false;
        }
        if self.mode.defragment {
            path = defrag::defragment(&path, self.scene, self.goal);
        }
        let Ok(cost) = path.cost(self.scene.space()) else {
            return false;
        };
        if self.best.as_ref().is_some_and(|(_, c)| cost >= *c) {
            return false;
        }
        if self.time_to_first.is_none() {
            self.time_to_first = Some(now);
        }
        self.trace.push(TraceEntry {
            time_s: now,
            cost,
            scalar: None,
        });
        self.best = Some((path, cost));
        true
    }
}

/// Plans from `start` into `goal` and returns the best path found within the
/// termination condition of `cfg`.
pub fn plan(scene: &Scene, start: &[f64], goal: &GoalSpec, cfg: &PlannerConfig) -> Result<PlanResult> {
    let mode = SearchMode {
        defragment: true,
        connect_on_advance: false,
        stop_at_first: false,
    };
    BiSearch::new(scene, start, goal, cfg, mode)?.run()
}

/// Like [`plan`], also returning the start and goal trees for inspection.
pub fn plan_with_trees(
    scene: &Scene,
    start: &[f64],
    goal: &GoalSpec,
    cfg: &PlannerConfig,
) -> Result<(PlanResult, [Tree; 2])> {
    let mode = SearchMode {
        defragment: true,
        connect_on_advance: false,
        stop_at_first: false,
    };
    let mut search = BiSearch::new(scene, start, goal, cfg, mode)?;
    let result = search.run()?;
    let trees = search.trees().clone();
    Ok((result, trees))
}
