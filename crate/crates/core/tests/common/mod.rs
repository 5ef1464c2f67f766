//! Helpers shared by the integration and acceptance tests.
#![allow(dead_code)]

use larrt::geometry::{Pose, Vec2};
use larrt::{Body, BodyKind, FactoredPath, FactoredSpace, GoalSpec, JointBinding, JointModel, Scene, State};
use rand::Rng;

/// A cube on an x rail `[0, 3]` and two gates on y rails `[0, 1]` at
/// x = 1 and x = 2. The cube passes a gate only while it is raised.
pub fn two_gate_scene() -> Scene {
    let space = FactoredSpace::new(vec![vec![0], vec![1], vec![2]], vec![(0.0, 3.0), (0.0, 1.0), (0.0, 1.0)]).unwrap();
    let prismatic = |x: f64, y: f64| JointModel::Prismatic { axis: Vec2::new(x, y) };
    let bodies = vec![
        Body::new("cube", (0.2, 0.2), Pose::IDENTITY, BodyKind::Movable),
        Body::new("gate1", (0.1, 0.2), Pose::new(1.0, 0.0, 0.0), BodyKind::Movable),
        Body::new("gate2", (0.1, 0.2), Pose::new(2.0, 0.0, 0.0), BodyKind::Movable),
    ];
    let bindings = vec![
        JointBinding { body: 0, joints: vec![(0, prismatic(1.0, 0.0))] },
        JointBinding { body: 1, joints: vec![(1, prismatic(0.0, 1.0))] },
        JointBinding { body: 2, joints: vec![(2, prismatic(0.0, 1.0))] },
    ];
    Scene::new(space, bodies, bindings, &[]).unwrap()
}

/// A random collision-free isolated path of exactly `len` edges from
/// `start`, or `None` if the walk got stuck. Targets are drawn from a coarse
/// grid so that revisits and cancelling moves are common.
pub fn random_walk<R: Rng>(scene: &Scene, start: &State, len: usize, grid: usize, rng: &mut R) -> Option<FactoredPath> {
    let space = scene.space();
    let mut path = FactoredPath::single(start.clone());
    for _ in 0..len {
        let mut placed = false;
        for _ in 0..50 {
            let f = rng.random_range(0..space.num_factors());
            let mut next = path.end().clone();
            for &i in space.factor(f) {
                let (lo, hi) = space.bounds(i);
                let k = rng.random_range(0..=grid);
                next[i] = lo + (hi - lo) * k as f64 / grid as f64;
            }
            if space.changed_factors(path.end(), &next).len() != 1 || !scene.is_edge_valid(path.end(), &next) {
                continue;
            }
            path.push_edge(next, f);
            placed = true;
            break;
        }
        if !placed {
            return None;
        }
    }
    Some(path)
}

/// A goal that `end` satisfies: the given scenario goal if it does, else
/// `end` itself on a random non-empty subset of indices.
pub fn goal_for<R: Rng>(space: &FactoredSpace, preferred: Option<&GoalSpec>, end: &State, rng: &mut R) -> GoalSpec {
    if let Some(g) = preferred {
        if g.contains(end) {
            return g.clone();
        }
    }
    let mut indices: Vec<usize> = (0..space.dim()).filter(|_| rng.random_bool(0.5)).collect();
    if indices.is_empty() {
        indices.push(rng.random_range(0..space.dim()));
    }
    let values = indices.iter().map(|&i| end[i]).collect();
    GoalSpec::new(space, indices, values, 1e-9).unwrap()
}

/// Fewest actions over every ordering of every subset of the path's moves
/// (a move sets one factor to the coordinates it has after that edge) that
/// stays collision-free and ends in `goal`. Exhaustive; keep paths short.
pub fn min_actions_by_reordering(scene: &Scene, path: &FactoredPath, goal: &GoalSpec) -> Option<u32> {
    let space = scene.space();
    let moves: Vec<(usize, State)> = (0..path.num_edges())
        .map(|k| (path.edge_factor(k), path.states()[k + 1].clone()))
        .collect();
    let mut best: Option<u32> = None;
    let mut used = vec![false; moves.len()];
    #[allow(clippy::too_many_arguments)]
    fn dfs(
        scene: &Scene,
        moves: &[(usize, State)],
        goal: &GoalSpec,
        cur: &State,
        last: Option<usize>,
        actions: u32,
        used: &mut [bool],
        best: &mut Option<u32>,
    ) {
        if best.is_some_and(|b| actions >= b) {
            return;
        }
        if goal.contains(cur) {
            *best = Some(actions);
        }
        let space = scene.space();
        for m in 0..moves.len() {
            if used[m] {
                continue;
            }
            let (f, target) = &moves[m];
            let mut next = cur.clone();
            for &i in space.factor(*f) {
                next[i] = target[i];
            }
            if space.changed_factors(cur, &next).is_empty() || !scene.is_edge_valid(cur, &next) {
                continue;
            }
            used[m] = true;
            let a = actions + u32::from(last != Some(*f));
            dfs(scene, moves, goal, &next, Some(*f), a, used, best);
            used[m] = false;
        }
    }
    let _ = space;
    dfs(scene, &moves, goal, path.start(), None, 0, &mut used, &mut best);
    best
}
