//! Path defragmentation: reorders factor blocks so that blocks of the same
//! factor merge, then removes unnecessary blocks and shortcuts within blocks.
//!
//! Edges are treated as moves that set one factor's coordinates to the values
//! they have at the end of the edge. Moves of different factors commute as far
//! as the end state is concerned, so a reordered stretch always ends where the
//! original did; only collisions along the way can reject it.

use crate::scene::Scene;
use crate::space::{CostTriple, FactoredPath, GoalSpec, State};

/// A maximal run of edges moving the same factor: edges `start..end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub factor: usize,
    pub start: usize,
    pub end: usize,
}

impl Block {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// Blocks of an isolated path, in order. Panics on a `Multi` edge.
pub fn blocks(path: &FactoredPath) -> Vec<Block> {
    let mut out: Vec<Block> = Vec::new();
    for k in 0..path.num_edges() {
        let f = path.edge_factor(k);
        match out.last_mut() {
            Some(b) if b.factor == f => b.end = k + 1,
            _ => out.push(Block {
                factor: f,
                start: k,
                end: k + 1,
            }),
        }
    }
    out
}

/// Sets `factor` to its coordinates in `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct Move {
    pub factor: usize,
    pub target: State,
}

fn moves(states: &[State], edges: &[usize], range: std::ops::Range<usize>) -> Vec<Move> {
    range
        .map(|k| Move {
            factor: edges[k],
            target: states[k + 1].clone(),
        })
        .collect()
}

/// Applies `merge` and then `push` from `x_from`, validating every edge.
/// Returns the new states after `x_from` with their edge factors, or `None`
/// when a block is empty or an edge collides.
pub fn reconnect(scene: &Scene, x_from: &State, merge: &[Move], push: &[Move]) -> Option<Vec<(State, usize)>> {
    if merge.is_empty() || push.is_empty() {
        return None;
    }
    let space = scene.space();
    let mut cur = x_from.clone();
    let mut out = Vec::with_capacity(merge.len() + push.len());
    for m in merge.iter().chain(push) {
        let mut next = cur.clone();
        next.assign_factor(space, m.factor, &m.target);
        if !scene.is_edge_valid(&cur, &next) {
            return None;
        }
        out.push((next.clone(), m.factor));
        cur = next;
    }
    Some(out)
}

fn split(path: &FactoredPath) -> (Vec<State>, Vec<usize>) {
    let edges = (0..path.num_edges()).map(|k| path.edge_factor(k)).collect();
    (path.states().to_vec(), edges)
}

fn join(states: Vec<State>, edges: Vec<usize>) -> FactoredPath {
    FactoredPath::from_parts(states, edges.into_iter().map(crate::space::EdgeFactor::Single).collect())
}

fn cost_of(scene: &Scene, path: &FactoredPath) -> CostTriple {
    path.cost(scene.space()).expect("defragmented paths stay isolated")
}

/// One left-to-right pass: whenever the factor changes away from `fid`, the
/// next stretch of `fid` edges is pulled in front of the stretch in between.
pub fn merge_sweep(path: &FactoredPath, scene: &Scene) -> FactoredPath {
    let (mut states, mut edges) = split(path);
    let n = edges.len();
    if n < 3 {
        return path.clone();
    }
    let mut fid = edges[0];
    let mut i = 1;
    while i < n {
        if edges[i] == fid {
            i += 1;
            continue;
        }
        let Some(j) = (i..n).find(|&k| edges[k] == fid) else {
            fid = edges[i];
            i += 1;
            continue;
        };
        let k = (j..n).find(|&k| edges[k] != fid).unwrap_or(n);
        let merge = moves(&states, &edges, j..k);
        let push = moves(&states, &edges, i..j);
        match reconnect(scene, &states[i], &merge, &push) {
            Some(chain) => {
                for (offset, (s, f)) in chain.into_iter().enumerate() {
                    states[i + 1 + offset] = s;
                    edges[i + offset] = f;
                }
                i += k - j;
                fid = edges[i];
                i += 1;
            }
            None => {
                fid = edges[i];
                i += 1;
            }
        }
    }
    join(states, edges)
}

/// Paths up to this many edges are also defragmented by [`exhaustive_reorder`].
pub const EXHAUSTIVE_MAX_EDGES: usize = 6;

/// Merge sweeps in both directions until the cost stops improving, then
/// [`try_skip_factor`] and [`simplify_action_intervals`]. Short paths are
/// additionally searched exhaustively and the cheaper result is kept. The
/// whole pipeline repeats while it keeps lowering the cost.
///
/// The backward sweep handles merges that require postponing a block rather
/// than advancing one. Non-isolated input is returned unchanged.
pub fn defragment(path: &FactoredPath, scene: &Scene, goal: &GoalSpec) -> FactoredPath {
    let mut p = path.clone();
    let mut cost = cost_of(scene, &p);
    for _ in 0..MAX_PASSES {
        let next = defragment_pass(&p, scene, goal);
        let c = cost_of(scene, &next);
        if c >= cost {
            break;
        }
        p = next;
        cost = c;
    }
    p
}

/// Upper bound on whole-pipeline repetitions inside [`defragment`].
const MAX_PASSES: usize = 32;

fn defragment_pass(path: &FactoredPath, scene: &Scene, goal: &GoalSpec) -> FactoredPath {
    let greedy = defragment_greedy(path, scene, goal);
    if !path.is_isolated() || path.num_edges() > EXHAUSTIVE_MAX_EDGES {
        return greedy;
    }
    match exhaustive_reorder(path, scene, goal) {
        Some(p) => {
            let p = simplify_action_intervals(&p, scene);
            if cost_of(scene, &p) < cost_of(scene, &greedy) {
                p
            } else {
                greedy
            }
        }
        None => greedy,
    }
}

fn defragment_greedy(path: &FactoredPath, scene: &Scene, goal: &GoalSpec) -> FactoredPath {
    if !path.is_isolated() {
        return path.clone();
    }
    let mut p = path.clone();
    let mut cost = cost_of(scene, &p);
    loop {
        let forward = merge_sweep(&p, scene);
        let both = merge_sweep(&forward.reversed(), scene).reversed();
        let c = cost_of(scene, &both);
        if c >= cost {
            break;
        }
        p = both;
        cost = c;
    }
    let p = try_skip_factor(&p, scene, goal);
    simplify_action_intervals(&p, scene)
}

/// Repeatedly removes the first block whose removal keeps the path valid and
/// in the goal while strictly lowering its cost. Downstream coordinates of the
/// skipped factor are reset to their pre-block values until that factor moves
/// again.
pub fn try_skip_factor(path: &FactoredPath, scene: &Scene, goal: &GoalSpec) -> FactoredPath {
    if !path.is_isolated() {
        return path.clone();
    }
    let mut p = path.clone();
    'outer: loop {
        let cost = cost_of(scene, &p);
        for b in blocks(&p) {
            if let Some(candidate) = skip_block(&p, scene, goal, b) {
                if cost_of(scene, &candidate) < cost {
                    p = candidate;
                    continue 'outer;
                }
            }
        }
        return p;
    }
}

fn skip_block(path: &FactoredPath, scene: &Scene, goal: &GoalSpec, b: Block) -> Option<FactoredPath> {
    let space = scene.space();
    let (states, edges) = split(path);
    let n = edges.len();
    let f = b.factor;
    let base = states[b.start].clone();
    let next = (b.end..n).find(|&k| edges[k] == f).unwrap_or(n);

    let mut out = FactoredPath::single(base.clone());
    for (s, state) in states.iter().enumerate().skip(b.end + 1) {
        let mut x = state.clone();
        if s <= next {
            x.assign_factor(space, f, &base);
        }
        out.push_state(space, x);
    }
    if !goal.contains(out.end()) {
        return None;
    }
    // The edges between the block start and the next move of `f` changed.
    let modified = (next - b.end + 1).min(out.num_edges());
    let states = out.states();
    for k in 0..modified {
        if !scene.is_edge_valid(&states[k], &states[k + 1]) {
            return None;
        }
    }
    let mut full = FactoredPath::from_parts(path.states()[..=b.start].to_vec(), path.edges()[..b.start].to_vec());
    let (tail_states, tail_edges) = out.into_parts();
    for (s, e) in tail_states.into_iter().skip(1).zip(tail_edges) {
        full.push_edge(s, e.single()?);
    }
    Some(full)
}

/// Cheapest collision-free sequence, over every ordering of every subset of
/// the path's moves, that ends in `goal`. Exponential in the number of edges;
/// `None` if no such sequence exists (the input itself qualifies whenever it
/// ends in the goal).
pub fn exhaustive_reorder(path: &FactoredPath, scene: &Scene, goal: &GoalSpec) -> Option<FactoredPath> {
    if !path.is_isolated() {
        return None;
    }
    let (states, edges) = split(path);
    let all = moves(&states, &edges, 0..edges.len());
    let mut search = Exhaustive {
        scene,
        goal,
        moves: &all,
        used: vec![false; all.len()],
        trail: vec![(states[0].clone(), usize::MAX)],
        best: None,
    };
    search.dfs(CostTriple::ZERO);
    search.best.map(|(_, p)| p)
}

struct Exhaustive<'a> {
    scene: &'a Scene,
    goal: &'a GoalSpec,
    moves: &'a [Move],
    used: Vec<bool>,
    trail: Vec<(State, usize)>,
    best: Option<(CostTriple, FactoredPath)>,
}

impl Exhaustive<'_> {
    fn dfs(&mut self, cost: CostTriple) {
        // Costs only grow along a sequence, so a prefix no better than the best is dead.
        if self.best.as_ref().is_some_and(|(b, _)| cost >= *b) {
            return;
        }
        let (cur, last) = self.trail.last().cloned().expect("trail starts with the start state");
        if self.goal.contains(&cur) {
            let states = self.trail.iter().map(|(s, _)| s.clone()).collect();
            let edges = self.trail[1..].iter().map(|&(_, f)| f).collect();
            self.best = Some((cost, join(states, edges)));
            return;
        }
        let space = self.scene.space();
        for m in 0..self.moves.len() {
            if self.used[m] {
                continue;
            }
            let mv = &self.moves[m];
            let mut next = cur.clone();
            next.assign_factor(space, mv.factor, &mv.target);
            let d = space.factor_distance(mv.factor, &cur, &next);
            if d == 0.0 || !self.scene.is_edge_valid(&cur, &next) {
                continue;
            }
            let step = CostTriple::new(
                cost.actions + u32::from(last != mv.factor),
                cost.additive + 1,
                cost.dist + d,
            );
            self.used[m] = true;
            self.trail.push((next, mv.factor));
            self.dfs(step);
            self.trail.pop();
            self.used[m] = false;
        }
    }
}

/// Within each block, replaces runs of edges by the farthest chord that is
/// still motion-valid. Zero-length chords drop out of the path.
pub fn simplify_action_intervals(path: &FactoredPath, scene: &Scene) -> FactoredPath {
    if !path.is_isolated() {
        return path.clone();
    }
    let space = scene.space();
    let states = path.states();
    let mut out = FactoredPath::single(path.start().clone());
    for b in blocks(path) {
        let mut i = b.start;
        while i < b.end {
            let mut j = b.end;
            while j > i + 1 && !scene.is_edge_valid(&states[i], &states[j]) {
                j -= 1;
            }
            out.push_state(space, states[j].clone());
            i = j;
        }
    }
    out
}
