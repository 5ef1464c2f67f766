//! Baseline planners over the same factored interpolation: RRT* minimising an
//! additive scalar cost, and first-solution RRT-Connect.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nn::KdTree;
use crate::planner::{
    isolate_transition, BiSearch, PlanResult, PlannerConfig, SearchMode, Stopwatch, TerminationReason, TraceEntry,
    GOAL_ATTEMPTS_PER_ROOT,
};
use crate::scene::Scene;
use crate::space::{FactoredPath, FactoredSpace, GoalSpec, State};

/// `weight * additive + dist`: one more edge always outweighs any distance saving.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdditiveCost {
    pub weight: f64,
}

impl AdditiveCost {
    pub fn for_space(space: &FactoredSpace) -> Self {
        AdditiveCost {
            weight: 1e4 * space.diameter(),
        }
    }

    /// Cost of the isolated motion `a -> b`.
    pub fn motion(&self, space: &FactoredSpace, a: &[f64], b: &[f64]) -> f64 {
        let c = space.motion_cost(a, b);
        self.weight * c.additive as f64 + c.dist
    }

    pub fn path(&self, space: &FactoredSpace, path: &FactoredPath) -> Result<f64> {
        let c = path.cost(space)?;
        Ok(self.weight * c.additive as f64 + c.dist)
    }
}

/// First-solution bi-directional search without any path optimisation.
pub fn rrt_connect_plan(scene: &Scene, start: &[f64], goal: &GoalSpec, cfg: &PlannerConfig) -> Result<PlanResult> {
    let mode = SearchMode {
        defragment: false,
        connect_on_advance: true,
        stop_at_first: true,
    };
    BiSearch::new(scene, start, goal, cfg, mode)?.run()
}

struct StarNode {
    state: State,
    parent: Option<usize>,
    cost: f64,
    children: Vec<usize>,
}

struct StarTree<'a> {
    space: &'a FactoredSpace,
    metric: AdditiveCost,
    nodes: Vec<StarNode>,
    index: KdTree,
    rewires: usize,
}

impl<'a> StarTree<'a> {
    fn push(&mut self, state: State, parent: Option<usize>, cost: f64) -> usize {
        let id = self.index.insert(&state);
        if let Some(p) = parent {
            self.nodes[p].children.push(id);
        }
        self.nodes.push(StarNode {
            state,
            parent,
            cost,
            children: Vec::new(),
        });
        id
    }

    /// Adds the isolated chain from node `from` to `to`, returning the id of
    /// the node at `to`. With `existing`, that node is re-parented instead.
    fn attach(&mut self, from: usize, to: &State, order: &[usize], existing: Option<usize>) -> usize {
        let chain = isolate_transition(self.space, &self.nodes[from].state, to, order);
        if chain.is_empty() {
            return from;
        }
        let mut parent = from;
        let last = chain.len() - 1;
        for (k, s) in chain.into_iter().enumerate() {
            let cost = self.nodes[parent].cost + self.metric.motion(self.space, &self.nodes[parent].state, &s);
            match existing {
                Some(id) if k == last => {
                    self.reparent(id, parent, cost);
                    parent = id;
                }
                _ => parent = self.push(s, Some(parent), cost),
            }
        }
        parent
    }

    fn reparent(&mut self, id: usize, parent: usize, cost: f64) {
        if let Some(old) = self.nodes[id].parent {
            self.nodes[old].children.retain(|&c| c != id);
        }
        self.nodes[id].parent = Some(parent);
        self.nodes[parent].children.push(id);
        let delta = cost - self.nodes[id].cost;
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            self.nodes[n].cost += delta;
            stack.extend(self.nodes[n].children.iter().copied());
        }
        self.rewires += 1;
    }

    fn branch_path(&self, i: usize) -> FactoredPath {
        let mut ids = vec![i];
        while let Some(p) = self.nodes[*ids.last().unwrap()].parent {
            ids.push(p);
        }
        ids.reverse();
        FactoredPath::from_states(self.space, ids.into_iter().map(|k| self.nodes[k].state.clone()).collect())
    }
}

/// Volume of the unit ball in `d` dimensions.
fn unit_ball_volume(d: usize) -> f64 {
    let d = d as f64;
    PI.powf(d / 2.0) / gamma_half_plus_one(d)
}

/// `Gamma(d / 2 + 1)` by the recurrence from `Gamma(1) = 1` or `Gamma(1/2) = sqrt(pi)`.
fn gamma_half_plus_one(d: f64) -> f64 {
    let mut x = d / 2.0 + 1.0;
    let mut acc = 1.0;
    while x > 1.0 {
        x -= 1.0;
        acc *= x;
    }
    if (x - 0.5).abs() < 1e-9 {
        acc * PI.sqrt()
    } else {
        acc
    }
}

/// Radius constant of the standard asymptotically optimal neighbourhood.
fn rewire_gamma(space: &FactoredSpace, factor: f64) -> (f64, usize) {
    let ranges: Vec<f64> = (0..space.dim())
        .map(|i| {
            let (lo, hi) = space.bounds(i);
            space.weights()[i] * (hi - lo)
        })
        .filter(|r| *r > 0.0)
        .collect();
    let d = ranges.len().max(1);
    let measure: f64 = ranges.iter().product();
    let df = d as f64;
    let gamma = factor * 2.0 * (1.0 + 1.0 / df).powf(1.0 / df) * (measure / unit_ball_volume(d)).powf(1.0 / df);
    (gamma, d)
}

/// Single-tree RRT* under [`AdditiveCost`]. Tree edges are isolated into
/// single-factor edges, and intermediate nodes are first-class tree nodes.
/// The trace records both the scalar cost and the true action cost.
pub fn rrt_star_plan(scene: &Scene, start: &[f64], goal: &GoalSpec, cfg: &PlannerConfig) -> Result<PlanResult> {
    rrt_star_run(scene, start, goal, cfg).map(|(r, _)| r)
}

fn rrt_star_run(scene: &Scene, start: &[f64], goal: &GoalSpec, cfg: &PlannerConfig) -> Result<(PlanResult, usize)> {
    let space = scene.space();
    space.check_dim(start)?;
    cfg.validate(space)?;
    if !scene.is_state_valid(start) {
        return Err(Error::InvalidStart);
    }
    let watch = Stopwatch::new(cfg.clock);
    if goal.contains(start) {
        return Ok((PlanResult::start_in_goal(start), 0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let attempts = GOAL_ATTEMPTS_PER_ROOT * cfg.max_goal_samples;
    if !(0..attempts).any(|_| scene.is_state_valid(&space.sample_goal(goal, &mut rng))) {
        return Err(Error::NoValidGoalSample { attempts });
    }

    let max_dist = cfg.extend_distance(space);
    let (gamma, d) = rewire_gamma(space, cfg.rewire_factor);
    let mut tree = StarTree {
        space,
        metric: AdditiveCost::for_space(space),
        nodes: Vec::new(),
        index: KdTree::new(space.dim()),
        rewires: 0,
    };
    tree.push(State::from(start), None, 0.0);
    let mut goal_nodes: Vec<usize> = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    let mut best_path: Option<FactoredPath> = None;
    let mut trace = Vec::new();
    let mut time_to_first = None;
    let mut iterations = 0u64;

    let termination = loop {
        if watch.elapsed(iterations) >= cfg.time_budget_s {
            break TerminationReason::TimeBudget;
        }
        if cfg.max_iterations.is_some_and(|m| iterations >= m) {
            break TerminationReason::MaxIterations;
        }
        iterations += 1;

        let x_rand = if rng.random::<f64>() < cfg.goal_bias {
            space.sample_goal(goal, &mut rng)
        } else {
            space.sample_uniform(&mut rng)
        };
        let (near, dn) = tree.index.nearest(space, &x_rand).expect("tree has a root");
        if dn == 0.0 {
            continue;
        }
        let order = space.random_order(&mut rng);
        let mut x_new = if dn > max_dist {
            space.interpolate(&tree.nodes[near].state, &x_rand, max_dist / dn, &order)
        } else {
            x_rand
        };
        let changed = space.changed_factors(&tree.nodes[near].state, &x_new);
        if changed.is_empty() {
            continue;
        }
        for f in 0..space.num_factors() {
            if !changed.contains(&f) {
                let src = tree.nodes[near].state.clone();
                x_new.assign_factor(space, f, &src);
            }
        }
        if !scene.is_motion_valid(&tree.nodes[near].state, &x_new, &order) {
            continue;
        }

        let n = tree.nodes.len() as f64;
        let radius = (gamma * ((n + 1.0).ln() / (n + 1.0)).powf(1.0 / d as f64)).min(max_dist);
        let neighbours = tree.index.within(space, &x_new, radius);

        let mut parent = near;
        let mut parent_cost = tree.nodes[near].cost + tree.metric.motion(space, &tree.nodes[near].state, &x_new);
        for &m in &neighbours {
            if m == near {
                continue;
            }
            let c = tree.nodes[m].cost + tree.metric.motion(space, &tree.nodes[m].state, &x_new);
            if c < parent_cost && scene.is_motion_valid(&tree.nodes[m].state, &x_new, &order) {
                parent = m;
                parent_cost = c;
            }
        }
        let first_new = tree.nodes.len();
        let new_id = tree.attach(parent, &x_new, &order, None);

        for &m in &neighbours {
            if m == parent || space.changed_factors(&x_new, &tree.nodes[m].state).is_empty() {
                continue;
            }
            let via = tree.nodes[new_id].cost + tree.metric.motion(space, &x_new, &tree.nodes[m].state);
            if via < tree.nodes[m].cost {
                let target = tree.nodes[m].state.clone();
                if scene.is_motion_valid(&x_new, &target, &order) {
                    tree.attach(new_id, &target, &order, Some(m));
                }
            }
        }

        for id in first_new..tree.nodes.len() {
            if goal.contains(&tree.nodes[id].state) {
                goal_nodes.push(id);
            }
        }
        let current = goal_nodes
            .iter()
            .map(|&g| (g, tree.nodes[g].cost))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((g, c)) = current {
            if best.is_none_or(|(_, bc)| c < bc) {
                let now = watch.elapsed(iterations);
                let path = tree.branch_path(g);
                let cost = path.cost(space).expect("tree edges are isolated");
                time_to_first.get_or_insert(now);
                trace.push(TraceEntry {
                    time_s: now,
                    cost,
                    scalar: Some(c),
                });
                best = Some((g, c));
                best_path = Some(path);
                if cfg.stop_at_actions.is_some_and(|limit| cost.actions <= limit) {
                    break TerminationReason::CostThreshold;
                }
            }
        }
    };

    let best_cost = best_path.as_ref().map(|p| p.cost(space).expect("isolated"));
    Ok((
        PlanResult {
            best_path,
            best_cost,
            cost_trace: trace,
            iterations,
            termination,
            time_to_first_s: time_to_first,
            elapsed_s: watch.elapsed(iterations),
        },
        tree.rewires,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{blocker_scene, free_scene};
    use crate::planner::Clock;
    use crate::space::CostTriple;
    use proptest::prelude::*;

    fn cfg(seed: u64, iterations: u64) -> PlannerConfig {
        PlannerConfig {
            seed,
            max_iterations: Some(iterations),
            time_budget_s: 1e9,
            clock: Clock::Virtual {
                iterations_per_second: 1000.0,
            },
            ..PlannerConfig::default()
        }
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-12);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-12);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * PI).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn additive_cost_splits(steps in prop::collection::vec((0usize..3, 0.0f64..10.0), 2..12), cut in 1usize..11) {
            let s = free_scene(3);
            let space = s.space();
            let mut x = State::new(vec![5.0; 3]);
            let mut states = vec![x.clone()];
            for (f, v) in steps {
                x[f] = v;
                states.push(x.clone());
            }
            let cut = cut.min(states.len() - 1);
            let whole = FactoredPath::from_states(space, states.clone());
            let a = FactoredPath::from_states(space, states[..=cut].to_vec());
            let b = FactoredPath::from_states(space, states[cut..].to_vec());
            let m = AdditiveCost::for_space(space);
            let lhs = m.path(space, &whole).unwrap();
            let rhs = m.path(space, &a).unwrap() + m.path(space, &b).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.max(1.0));
        }
    }

    #[test]
    fn start_in_goal_costs_nothing() {
        let s = free_scene(2);
        let goal = GoalSpec::new(s.space(), vec![0], vec![1.0], 0.1).unwrap();
        let r = rrt_star_plan(&s, &[1.0, 1.0], &goal, &cfg(0, 10)).unwrap();
        assert_eq!(r.best_cost, Some(CostTriple::ZERO));
        let r = rrt_connect_plan(&s, &[1.0, 1.0], &goal, &cfg(0, 10)).unwrap();
        assert_eq!(r.best_cost, Some(CostTriple::ZERO));
    }

    #[test]
    fn rrt_star_solves_blocker_and_rewires() {
        let s = blocker_scene();
        let goal = GoalSpec::new(s.space(), vec![0], vec![3.0], 0.05).unwrap();
        let (r, rewires) = rrt_star_run(&s, &[0.0, 0.0], &goal, &cfg(4, 500)).unwrap();
        assert!(rewires > 0, "rewiring should be active by 500 samples");
        let path = r.best_path.expect("solvable");
        assert!(goal.contains(path.end()));
        for k in 0..path.num_edges() {
            assert!(s.is_edge_valid(&path.states()[k], &path.states()[k + 1]));
        }
        for w in r.cost_trace.windows(2) {
            assert!(w[1].scalar.unwrap() < w[0].scalar.unwrap());
        }
    }

    #[test]
    fn rrt_connect_stops_at_first_solution() {
        let s = blocker_scene();
        let goal = GoalSpec::new(s.space(), vec![0], vec![3.0], 0.05).unwrap();
        let r = rrt_connect_plan(&s, &[0.0, 0.0], &goal, &cfg(9, 5000)).unwrap();
        assert_eq!(r.termination, TerminationReason::FirstSolution);
        assert_eq!(r.cost_trace.len(), 1);
        assert!(goal.contains(r.best_path.unwrap().end()));
    }
}
