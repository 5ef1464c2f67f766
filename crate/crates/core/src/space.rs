//! Factored state spaces.
//!
//! A [`FactoredSpace`] partitions the joint indices `0..n` into factors: sets of
//! joints that can be manipulated together in a single action. Motions between
//! states are interpolated one factor at a time, and paths are scored with a
//! lexicographic [`CostTriple`] whose first layer counts maximal runs of
//! same-factor edges.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Deref, DerefMut};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Tolerance (joint units) below which a coordinate difference is residue, not motion.
pub const CHANGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum JointKind {
    #[default]
    Prismatic,
    /// Limited revolute joint. No angular wraparound.
    Revolute,
}

#[derive(Debug, Clone)]
pub struct FactoredSpace {
    factors: Vec<Vec<usize>>,
    factor_of: Vec<usize>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    weights: Vec<f64>,
    kinds: Vec<JointKind>,
}

impl FactoredSpace {
    /// Builds a space from a factor partition and per-dimension bounds.
    ///
    /// The factors must be non-empty, pairwise disjoint and cover `0..bounds.len()`.
    /// Weights default to 1 and joints to prismatic.
    pub fn new(factors: Vec<Vec<usize>>, bounds: Vec<(f64, f64)>) -> Result<Self> {
        let n = bounds.len();
        if n == 0 {
            return Err(Error::InvalidSpace("space has no dimensions".into()));
        }
        if factors.is_empty() {
            return Err(Error::InvalidSpace("space has no factors".into()));
        }
        let mut factor_of = vec![usize::MAX; n];
        for (f, members) in factors.iter().enumerate() {
            if members.is_empty() {
                return Err(Error::InvalidSpace(format!("factor {f} is empty")));
            }
            for &i in members {
                if i >= n {
                    return Err(Error::InvalidSpace(format!(
                        "factor {f} references index {i}, space has {n} dimensions"
                    )));
                }
                if factor_of[i] != usize::MAX {
                    return Err(Error::InvalidSpace(format!(
                        "index {i} appears in factor {} and factor {f}",
                        factor_of[i]
                    )));
                }
                factor_of[i] = f;
            }
        }
        if let Some(i) = factor_of.iter().position(|&f| f == usize::MAX) {
            return Err(Error::InvalidSpace(format!("index {i} is in no factor")));
        }
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(Error::InvalidSpace(format!(
                    "bounds of index {i} are not an interval: [{lo}, {hi}]"
                )));
            }
        }
        let (lo, hi) = bounds.into_iter().unzip();
        Ok(FactoredSpace {
            factors,
            factor_of,
            lo,
            hi,
            weights: vec![1.0; n],
            kinds: vec![JointKind::Prismatic; n],
        })
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.dim() {
            return Err(Error::InvalidSpace(format!(
                "{} weights for {} dimensions",
                weights.len(),
                self.dim()
            )));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidSpace(format!(
                "weight of index {i} must be positive, got {}",
                weights[i]
            )));
        }
        self.weights = weights;
        Ok(self)
    }

    pub fn with_kinds(mut self, kinds: Vec<JointKind>) -> Result<Self> {
        if kinds.len() != self.dim() {
            return Err(Error::InvalidSpace(format!(
                "{} joint kinds for {} dimensions",
                kinds.len(),
                self.dim()
            )));
        }
        self.kinds = kinds;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Vec<usize>] {
        &self.factors
    }

    pub fn factor(&self, f: usize) -> &[usize] {
        &self.factors[f]
    }

    /// The factor containing joint index `i`.
    pub fn factor_of(&self, i: usize) -> usize {
        self.factor_of[i]
    }

    pub fn bounds(&self, i: usize) -> (f64, f64) {
        (self.lo[i], self.hi[i])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kind(&self, i: usize) -> JointKind {
        self.kinds[i]
    }

    /// Mean of the weighted per-dimension ranges.
    pub fn mean_weighted_range(&self) -> f64 {
        let total: f64 = (0..self.dim())
            .map(|i| self.weights[i] * (self.hi[i] - self.lo[i]))
            .sum();
        total / self.dim() as f64
    }

    /// Largest possible distance between two states of the space.
    pub fn diameter(&self) -> f64 {
        let gaps: Vec<f64> = (0..self.dim()).map(|i| self.hi[i] - self.lo[i]).collect();
        self.distance_from_gaps(&gaps)
    }

    pub fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            })
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .enumerate()
                .all(|(i, v)| *v >= self.lo[i] && *v <= self.hi[i])
    }

    /// Weighted Euclidean distance restricted to the indices of factor `f`.
    pub fn factor_distance(&self, f: usize, a: &[f64], b: &[f64]) -> f64 {
        self.factors[f]
            .iter()
            .map(|&i| {
                let d = self.weights[i] * (a[i] - b[i]);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Per-factor distances between `a` and `b`, indexed by factor id.
    pub fn factor_distances(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        (0..self.num_factors())
            .map(|f| self.factor_distance(f, a, b))
            .collect()
    }

    /// Manhattan-over-factors distance: the sum of the per-factor distances,
    /// i.e. the length of a factor-by-factor motion from `a` to `b`.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        (0..self.num_factors())
            .map(|f| self.factor_distance(f, a, b))
            .sum()
    }

    /// Distance computed from absolute per-index gaps. Also serves as the
    /// lower bound used by nearest-neighbour pruning.
    pub fn distance_from_gaps(&self, gaps: &[f64]) -> f64 {
        self.factors
            .iter()
            .map(|members| {
                members
                    .iter()
                    .map(|&i| {
                        let d = self.weights[i] * gaps[i];
                        d * d
                    })
                    .sum::<f64>()
                    .sqrt()
            })
            .sum()
    }

    /// Factors with at least one index differing by more than `tol`, ascending.
    pub fn changed_factors_tol(&self, a: &[f64], b: &[f64], tol: f64) -> Vec<usize> {
        (0..self.num_factors())
            .filter(|&f| self.factors[f].iter().any(|&i| (a[i] - b[i]).abs() > tol))
            .collect()
    }

    pub fn changed_factors(&self, a: &[f64], b: &[f64]) -> Vec<usize> {
        self.changed_factors_tol(a, b, CHANGE_TOL)
    }

    /// Cost of the direct (factor-by-factor) motion between two states.
    pub fn motion_cost(&self, a: &[f64], b: &[f64]) -> CostTriple {
        let changed = self.changed_factors(a, b).len() as u32;
        CostTriple {
            actions: changed,
            additive: changed,
            dist: self.distance(a, b),
        }
    }

    /// The identity ordering `0..M`.
    pub fn default_order(&self) -> Vec<usize> {
        (0..self.num_factors()).collect()
    }

    pub fn random_order<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let mut order = self.default_order();
        order.shuffle(rng);
        order
    }

    /// Manhattan-like interpolation: factors are traversed in `order`, each one
    /// occupying a share of `[0, 1]` proportional to its distance.
    ///
    /// When `t` lands exactly on a boundary the later factor is selected with
    /// zero progress, and factors with zero distance are skipped.
    pub fn interpolate(&self, from: &[f64], to: &[f64], t: f64, order: &[usize]) -> State {
        let mut out = from.to_vec();
        self.interpolate_into(from, to, t, order, &mut out);
        State(out)
    }

    pub fn interpolate_into(
        &self,
        from: &[f64],
        to: &[f64],
        t: f64,
        order: &[usize],
        out: &mut [f64],
    ) {
        debug_assert_eq!(order.len(), self.num_factors());
        out.copy_from_slice(from);
        if t <= 0.0 {
            return;
        }
        let dists = self.factor_distances(from, to);
        let total: f64 = order.iter().map(|&f| dists[f]).sum();
        if total <= 0.0 {
            return;
        }
        if t >= 1.0 {
            out.copy_from_slice(to);
            return;
        }
        let mut done = 0.0;
        for &f in order {
            let share = dists[f] / total;
            if share == 0.0 {
                continue;
            }
            let end = done + share;
            if t < end {
                let s = (t - done) / share;
                for &i in &self.factors[f] {
                    out[i] = lerp(from[i], to[i], s);
                }
                return;
            }
            for &i in &self.factors[f] {
                out[i] = to[i];
            }
            done = end;
        }
        // Rounding left `t` beyond the last boundary.
        out.copy_from_slice(to);
    }

    /// Parameter intervals `(factor, t_start, t_end)` of the non-degenerate
    /// segments of the interpolation from `from` to `to` under `order`.
    pub fn segments(&self, from: &[f64], to: &[f64], order: &[usize]) -> Vec<(usize, f64, f64)> {
        let dists = self.factor_distances(from, to);
        let total: f64 = order.iter().map(|&f| dists[f]).sum();
        let mut out = Vec::new();
        if total <= 0.0 {
            return out;
        }
        let mut done = 0.0;
        for &f in order {
            let share = dists[f] / total;
            if share == 0.0 {
                continue;
            }
            out.push((f, done, done + share));
            done += share;
        }
        if let Some(last) = out.last_mut() {
            last.2 = 1.0;
        }
        out
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> State {
        State(
            (0..self.dim())
                .map(|i| sample_interval(rng, self.lo[i], self.hi[i]))
                .collect(),
        )
    }

    /// Goal indices are set exactly to their goal values; every other index is uniform.
    pub fn sample_goal<R: Rng + ?Sized>(&self, goal: &GoalSpec, rng: &mut R) -> State {
        let mut x = self.sample_uniform(rng);
        for (&i, &v) in goal.indices.iter().zip(&goal.values) {
            x[i] = v;
        }
        x
    }
}

fn sample_interval<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

#[inline]
pub(crate) fn lerp(a: f64, b: f64, s: f64) -> f64 {
    if s >= 1.0 {
        b
    } else {
        a + s * (b - a)
    }
}

/// A point of a factored space.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct State(pub Vec<f64>);

impl State {
    pub fn new(values: Vec<f64>) -> Self {
        State(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Copies the coordinates of factor `f` from `src`.
    pub fn assign_factor(&mut self, space: &FactoredSpace, f: usize, src: &[f64]) {
        for &i in space.factor(f) {
            self.0[i] = src[i];
        }
    }
}

impl Deref for State {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for State {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for State {
    fn from(v: Vec<f64>) -> Self {
        State(v)
    }
}

impl From<&[f64]> for State {
    fn from(v: &[f64]) -> Self {
        State(v.to_vec())
    }
}

/// An ε-goal region: every goal index within `epsilon` of its goal value.
#[derive(Debug, Clone, PartialEq)]
pub struct GoalSpec {
    indices: Vec<usize>,
    values: Vec<f64>,
    epsilon: f64,
}

impl GoalSpec {
    pub fn new(
        space: &FactoredSpace,
        indices: Vec<usize>,
        values: Vec<f64>,
        epsilon: f64,
    ) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidGoal("no goal indices".into()));
        }
        if indices.len() != values.len() {
            return Err(Error::InvalidGoal(format!(
                "{} goal indices but {} goal values",
                indices.len(),
                values.len()
            )));
        }
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::InvalidGoal(format!("epsilon must be >= 0, got {epsilon}")));
        }
        for (k, (&i, &v)) in indices.iter().zip(&values).enumerate() {
            if i >= space.dim() {
                return Err(Error::InvalidGoal(format!("goal index {i} out of range")));
            }
            if indices[..k].contains(&i) {
                return Err(Error::InvalidGoal(format!("goal index {i} listed twice")));
            }
            let (lo, hi) = space.bounds(i);
            if v < lo || v > hi {
                return Err(Error::InvalidGoal(format!(
                    "goal value {v} of index {i} outside [{lo}, {hi}]"
                )));
            }
        }
        Ok(GoalSpec {
            indices,
            values,
            epsilon,
        })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Closed per-index test: `|x_i - g_i| <= epsilon` for every goal index.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.indices
            .iter()
            .zip(&self.values)
            .all(|(&i, &g)| (x[i] - g).abs() <= self.epsilon)
    }

    /// Whether factor `f` of `space` contains a goal index.
    pub fn constrains_factor(&self, space: &FactoredSpace, f: usize) -> bool {
        self.indices.iter().any(|&i| space.factor_of(i) == f)
    }
}

/// Lexicographic path cost: non-additive action count, then edge count, then length.
#[derive(Debug, Clone, Copy, Default)]
pub struct CostTriple {
    pub actions: u32,
    pub additive: u32,
    pub dist: f64,
}

impl CostTriple {
    pub const ZERO: CostTriple = CostTriple {
        actions: 0,
        additive: 0,
        dist: 0.0,
    };

    pub fn new(actions: u32, additive: u32, dist: f64) -> Self {
        CostTriple {
            actions,
            additive,
            dist,
        }
    }
}

impl Ord for CostTriple {
    fn cmp(&self, other: &Self) -> Ordering {
        self.actions
            .cmp(&other.actions)
            .then(self.additive.cmp(&other.additive))
            .then(self.dist.total_cmp(&other.dist))
    }
}

impl PartialOrd for CostTriple {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for CostTriple {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for CostTriple {}

impl fmt::Display for CostTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "actions={} additive={} dist={:.6}",
            self.actions, self.additive, self.dist
        )
    }
}

/// Factor annotation of a path edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeFactor {
    Single(usize),
    /// The edge moves several factors at once; only valid before isolation.
    Multi,
}

impl EdgeFactor {
    pub fn single(self) -> Option<usize> {
        match self {
            EdgeFactor::Single(f) => Some(f),
            EdgeFactor::Multi => None,
        }
    }
}

/// A sequence of states with one factor annotation per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredPath {
    states: Vec<State>,
    edges: Vec<EdgeFactor>,
}

impl FactoredPath {
    /// A zero-edge path.
    pub fn single(state: State) -> Self {
        FactoredPath {
            states: vec![state],
            edges: Vec::new(),
        }
    }

    /// Annotates consecutive states; zero-change edges are dropped.
    pub fn from_states(space: &FactoredSpace, states: Vec<State>) -> Self {
        let mut iter = states.into_iter();
        let first = iter.next().expect("a path needs at least one state");
        let mut path = FactoredPath::single(first);
        for s in iter {
            path.push_state(space, s);
        }
        path
    }

    /// Builds a path from explicit parts. `edges.len()` must be `states.len() - 1`.
    pub fn from_parts(states: Vec<State>, edges: Vec<EdgeFactor>) -> Self {
        assert!(!states.is_empty(), "a path needs at least one state");
        assert_eq!(states.len(), edges.len() + 1, "one edge per consecutive pair");
        FactoredPath { states, edges }
    }

    /// Appends `s`, annotating the new edge from the actual change. Does nothing
    /// when `s` equals the current end state.
    pub fn push_state(&mut self, space: &FactoredSpace, s: State) {
        let changed = space.changed_factors(self.end(), &s);
        let edge = match changed.as_slice() {
            [] => return,
            [f] => EdgeFactor::Single(*f),
            _ => EdgeFactor::Multi,
        };
        self.states.push(s);
        self.edges.push(edge);
    }

    pub fn push_edge(&mut self, s: State, factor: usize) {
        self.states.push(s);
        self.edges.push(EdgeFactor::Single(factor));
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn edges(&self) -> &[EdgeFactor] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn start(&self) -> &State {
        &self.states[0]
    }

    pub fn end(&self) -> &State {
        self.states.last().expect("non-empty path")
    }

    pub fn into_parts(self) -> (Vec<State>, Vec<EdgeFactor>) {
        (self.states, self.edges)
    }

    /// Factor of edge `k`. Panics on a `Multi` edge.
    pub fn edge_factor(&self, k: usize) -> usize {
        self.edges[k]
            .single()
            .unwrap_or_else(|| panic!("edge {k} is not isolated"))
    }

    pub fn is_isolated(&self) -> bool {
        self.edges.iter().all(|e| matches!(e, EdgeFactor::Single(_)))
    }

    /// Checks that every annotation names the unique factor that actually changes.
    pub fn annotations_consistent(&self, space: &FactoredSpace) -> bool {
        self.edges.iter().enumerate().all(|(k, e)| {
            let changed = space.changed_factors(&self.states[k], &self.states[k + 1]);
            match e {
                EdgeFactor::Single(f) => changed == [*f],
                EdgeFactor::Multi => changed.len() > 1,
            }
        })
    }

    pub fn reversed(&self) -> FactoredPath {
        let mut states = self.states.clone();
        states.reverse();
        let mut edges = self.edges.clone();
        edges.reverse();
        FactoredPath { states, edges }
    }

    /// Truncates the path after its first state satisfying `goal`.
    pub fn truncate_at_goal(&mut self, goal: &GoalSpec) -> bool {
        match self.states.iter().position(|s| goal.contains(s)) {
            Some(k) => {
                self.states.truncate(k + 1);
                self.edges.truncate(k);
                true
            }
            None => false,
        }
    }

    /// `additive` counts edges, `actions` counts maximal runs of same-factor
    /// edges, `dist` sums edge lengths.
    pub fn cost(&self, space: &FactoredSpace) -> Result<CostTriple> {
        let mut cost = CostTriple::ZERO;
        let mut prev: Option<usize> = None;
        for (k, e) in self.edges.iter().enumerate() {
            let f = e.single().ok_or(Error::NotIsolated { edge: k })?;
            if prev != Some(f) {
                cost.actions += 1;
            }
            prev = Some(f);
            cost.additive += 1;
            cost.dist += space.factor_distance(f, &self.states[k], &self.states[k + 1]);
        }
        Ok(cost)
    }
}
