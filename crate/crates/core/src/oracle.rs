//! Exact lexicographic-optimal search on a lattice of the factored space.
//!
//! The lattice is anchored at the start state with one step size per joint.
//! Search nodes are `(cell, last moved factor)`, which turns the run count
//! into an additive cost: a step costs one action iff it moves a different
//! factor than the previous step. Only the `actions` layer is comparable with
//! continuous planners; `additive` counts lattice steps and `dist` sums the
//! weighted step lengths.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scene::Scene;
use crate::space::{CostTriple, FactoredPath, FactoredSpace, GoalSpec, State};

/// Largest number of `(cell, last factor)` nodes the oracle will search.
pub const NODE_BUDGET: u128 = 10_000_000;

/// Default step: one eighth of each joint range.
pub fn default_resolution(space: &FactoredSpace) -> Vec<f64> {
    (0..space.dim())
        .map(|i| {
            let (lo, hi) = space.bounds(i);
            (hi - lo) / 8.0
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub cost: CostTriple,
    pub path: FactoredPath,
    /// Search nodes popped from the queue.
    pub expanded: usize,
    /// Size of the augmented lattice.
    pub lattice_nodes: u128,
}

struct Lattice {
    anchor: Vec<f64>,
    /// Offset of the anchor in cell units along each joint.
    anchor_cell: Vec<usize>,
    counts: Vec<usize>,
    strides: Vec<usize>,
    steps: Vec<f64>,
}

impl Lattice {
    fn new(space: &FactoredSpace, start: &[f64], resolution: &[f64]) -> Self {
        let n = space.dim();
        let mut anchor_cell = Vec::with_capacity(n);
        let mut counts = Vec::with_capacity(n);
        for i in 0..n {
            let (lo, hi) = space.bounds(i);
            let r = resolution[i];
            if r > 0.0 {
                let below = ((start[i] - lo) / r + 1e-9).floor() as usize;
                let above = ((hi - start[i]) / r + 1e-9).floor() as usize;
                anchor_cell.push(below);
                counts.push(below + above + 1);
            } else {
                anchor_cell.push(0);
                counts.push(1);
            }
        }
        let mut strides = vec![1; n];
        for i in 1..n {
            strides[i] = strides[i - 1] * counts[i - 1];
        }
        Lattice {
            anchor: start.to_vec(),
            anchor_cell,
            counts,
            strides,
            steps: resolution.to_vec(),
        }
    }

    fn cells(&self) -> u128 {
        self.counts.iter().map(|&c| c as u128).product()
    }

    fn coords(&self, cell: usize, out: &mut [usize]) {
        for (i, c) in out.iter_mut().enumerate() {
            *c = (cell / self.strides[i]) % self.counts[i];
        }
    }

    fn state(&self, coords: &[usize]) -> State {
        State(
            coords
                .iter()
                .enumerate()
                .map(|(i, &k)| self.anchor[i] + (k as f64 - self.anchor_cell[i] as f64) * self.steps[i])
                .collect(),
        )
    }

    fn start_cell(&self) -> usize {
        self.anchor_cell.iter().zip(&self.strides).map(|(k, s)| k * s).sum()
    }
}

const UNKNOWN: u8 = 0;
const VALID: u8 = 1;
const INVALID: u8 = 2;

/// Lexicographically optimal lattice path from `start` into `goal`.
///
/// Steps move one joint by `±resolution[i]` and must be motion-valid.
/// Returns `Ok(None)` when no goal cell is reachable, and an error when the
/// augmented lattice exceeds [`NODE_BUDGET`].
pub fn oracle_solve(scene: &Scene, start: &[f64], goal: &GoalSpec, resolution: &[f64]) -> Result<Option<OracleSolution>> {
    let space = scene.space();
    space.check_dim(start)?;
    space.check_dim(resolution)?;
    if !scene.is_state_valid(start) {
        return Err(Error::InvalidStart);
    }
    let lattice = Lattice::new(space, start, resolution);
    let m = space.num_factors();
    let lattice_nodes = lattice.cells() * (m as u128 + 1);
    if lattice_nodes > NODE_BUDGET {
        return Err(Error::OracleBudgetExceeded {
            nodes: lattice_nodes,
            budget: NODE_BUDGET,
        });
    }
    let cells = lattice.cells() as usize;
    let n = space.dim();
    let slots = m + 1;
    let none = m;

    let mut validity = vec![UNKNOWN; cells];
    let mut edge_ok = vec![UNKNOWN; cells * 2 * n];
    let mut actions = vec![u32::MAX; cells * slots];
    let mut additive = vec![u32::MAX; cells * slots];
    let mut dist = vec![f64::INFINITY; cells * slots];
    let mut parent = vec![u32::MAX; cells * slots];
    let mut done = vec![false; cells * slots];

    let start_cell = lattice.start_cell();
    let root = start_cell * slots + none;
    actions[root] = 0;
    additive[root] = 0;
    dist[root] = 0.0;
    validity[start_cell] = VALID;

    let mut heap = BinaryHeap::new();
    heap.push(Reverse((CostTriple::ZERO, root)));
    let mut coords = vec![0usize; n];
    let mut last_popped = CostTriple::ZERO;
    let mut expanded = 0usize;

    while let Some(Reverse((cost, node))) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        expanded += 1;
        assert!(cost >= last_popped, "label-setting order violated");
        last_popped = cost;

        let cell = node / slots;
        let last = node % slots;
        lattice.coords(cell, &mut coords);
        let here = lattice.state(&coords);
        if goal.contains(&here) {
            let mut ids = vec![node];
            while parent[*ids.last().unwrap()] != u32::MAX {
                ids.push(parent[*ids.last().unwrap()] as usize);
            }
            ids.reverse();
            let mut states = Vec::with_capacity(ids.len());
            let mut c = vec![0usize; n];
            for id in ids {
                lattice.coords(id / slots, &mut c);
                states.push(lattice.state(&c));
            }
            return Ok(Some(OracleSolution {
                cost,
                path: FactoredPath::from_states(space, states),
                expanded,
                lattice_nodes,
            }));
        }

        for i in 0..n {
            if lattice.counts[i] == 1 {
                continue;
            }
            let f = space.factor_of(i);
            let step = CostTriple::new(
                u32::from(f != last),
                1,
                space.weights()[i] * lattice.steps[i],
            );
            for dir in 0..2 {
                let k = coords[i];
                let next_k = if dir == 0 {
                    match k.checked_sub(1) {
                        Some(v) => v,
                        None => continue,
                    }
                } else if k + 1 < lattice.counts[i] {
                    k + 1
                } else {
                    continue;
                };
                let next_cell = cell - k * lattice.strides[i] + next_k * lattice.strides[i];
                let next = next_cell * slots + f;
                if done[next] {
                    continue;
                }
                let cand = CostTriple::new(cost.actions + step.actions, cost.additive + 1, cost.dist + step.dist);
                let current = CostTriple::new(actions[next], additive[next], dist[next]);
                if cand >= current {
                    continue;
                }
                if validity[next_cell] == UNKNOWN {
                    let mut c = coords.clone();
                    c[i] = next_k;
                    validity[next_cell] = if scene.is_state_valid(&lattice.state(&c)) { VALID } else { INVALID };
                }
                if validity[next_cell] == INVALID {
                    continue;
                }
                let e = (cell * n + i) * 2 + dir;
                if edge_ok[e] == UNKNOWN {
                    let mut c = coords.clone();
                    c[i] = next_k;
                    let ok = scene.is_edge_valid(&here, &lattice.state(&c));
                    edge_ok[e] = if ok { VALID } else { INVALID };
                    // The reverse step sweeps the same segment.
                    edge_ok[(next_cell * n + i) * 2 + (1 - dir)] = edge_ok[e];
                }
                if edge_ok[e] == INVALID {
                    continue;
                }
                actions[next] = cand.actions;
                additive[next] = cand.additive;
                dist[next] = cand.dist;
                parent[next] = node as u32;
                heap.push(Reverse((cand, next)));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{blocker_scene, free_scene};

    #[test]
    fn blocker_needs_two_actions() {
        let s = blocker_scene();
        let goal = GoalSpec::new(s.space(), vec![0], vec![3.0], 1e-6).unwrap();
        let sol = oracle_solve(&s, &[0.0, 0.0], &goal, &[0.375, 0.125]).unwrap().unwrap();
        assert_eq!(sol.cost.actions, 2);
        assert_eq!(sol.path.cost(s.space()).unwrap(), sol.cost);
        assert_eq!(sol.path.start().values(), &[0.0, 0.0]);
        assert!(goal.contains(sol.path.end()));
        for k in 0..sol.path.num_edges() {
            assert!(s.is_edge_valid(&sol.path.states()[k], &sol.path.states()[k + 1]));
        }
    }

    #[test]
    fn start_in_goal_is_free() {
        let s = free_scene(2);
        let goal = GoalSpec::new(s.space(), vec![0], vec![0.0], 0.0).unwrap();
        let sol = oracle_solve(&s, &[0.0, 4.0], &goal, &default_resolution(s.space())).unwrap().unwrap();
        assert_eq!(sol.cost, CostTriple::ZERO);
    }

    #[test]
    fn free_space_counts_one_action_per_factor() {
        let s = free_scene(3);
        let goal = GoalSpec::new(s.space(), vec![0, 1], vec![10.0, 5.0], 1e-9).unwrap();
        let sol = oracle_solve(&s, &[0.0, 0.0, 0.0], &goal, &[1.25; 3]).unwrap().unwrap();
        assert_eq!(sol.cost, CostTriple::new(2, 12, 15.0));
    }

    #[test]
    fn unreachable_and_budget() {
        let s = free_scene(2);
        // 0.3 is not on the lattice anchored at 0 with step 1.25.
        let goal = GoalSpec::new(s.space(), vec![0], vec![0.3], 0.01).unwrap();
        assert!(oracle_solve(&s, &[0.0, 0.0], &goal, &[1.25, 1.25]).unwrap().is_none());
        let big = free_scene(4);
        let err = oracle_solve(&big, &[0.0; 4], &goal, &[0.001; 4]).unwrap_err();
        assert!(matches!(err, Error::OracleBudgetExceeded { .. }));
    }
}
