//! Incremental kd-tree over the Manhattan-over-factors metric.
//!
//! Subtrees are pruned with [`FactoredSpace::distance_from_gaps`], which is a
//! valid lower bound because the metric is monotone in every per-index gap.

use crate::space::FactoredSpace;

const NIL: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct KdNode {
    split: u16,
    left: u32,
    right: u32,
}

#[derive(Debug, Clone)]
pub struct KdTree {
    dim: usize,
    coords: Vec<f64>,
    nodes: Vec<KdNode>,
}

impl KdTree {
    pub fn new(dim: usize) -> Self {
        KdTree {
            dim,
            coords: Vec::new(),
            nodes: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn point(&self, k: usize) -> &[f64] {
        &self.coords[k * self.dim..(k + 1) * self.dim]
    }

    /// Inserts `p`; its id is the insertion index.
    pub fn insert(&mut self, p: &[f64]) -> usize {
        debug_assert_eq!(p.len(), self.dim);
        let id = self.nodes.len();
        self.coords.extend_from_slice(p);
        if id == 0 {
            self.nodes.push(KdNode {
                split: 0,
                left: NIL,
                right: NIL,
            });
            return id;
        }
        let mut cur = 0usize;
        let mut depth = 0usize;
        loop {
            let split = self.nodes[cur].split as usize;
            let go_left = p[split] < self.coords[cur * self.dim + split];
            let next = if go_left { self.nodes[cur].left } else { self.nodes[cur].right };
            depth += 1;
            if next == NIL {
                if go_left {
                    self.nodes[cur].left = id as u32;
                } else {
                    self.nodes[cur].right = id as u32;
                }
                break;
            }
            cur = next as usize;
        }
        self.nodes.push(KdNode {
            split: (depth % self.dim) as u16,
            left: NIL,
            right: NIL,
        });
        id
    }

    /// Nearest point id and its distance. Ties go to the lowest id.
    pub fn nearest(&self, space: &FactoredSpace, q: &[f64]) -> Option<(usize, f64)> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        let mut gaps = vec![0.0; self.dim];
        let mut scratch = vec![0.0; self.dim];
        self.nearest_rec(space, 0, q, &mut gaps, &mut scratch, &mut best);
        Some(best)
    }

    fn nearest_rec(
        &self,
        space: &FactoredSpace,
        node: usize,
        q: &[f64],
        gaps: &mut [f64],
        scratch: &mut [f64],
        best: &mut (usize, f64),
    ) {
        let p = self.point(node);
        for (s, (a, b)) in scratch.iter_mut().zip(q.iter().zip(p)) {
            *s = (a - b).abs();
        }
        let d = space.distance_from_gaps(scratch);
        if d < best.1 || (d == best.1 && node < best.0) {
            *best = (node, d);
        }
        let n = self.nodes[node];
        let split = n.split as usize;
        let diff = q[split] - p[split];
        let (near, far) = if diff < 0.0 { (n.left, n.right) } else { (n.right, n.left) };
        if near != NIL {
            self.nearest_rec(space, near as usize, q, gaps, scratch, best);
        }
        if far != NIL {
            let old = gaps[split];
            gaps[split] = diff.abs();
            if space.distance_from_gaps(gaps) <= best.1 {
                self.nearest_rec(space, far as usize, q, gaps, scratch, best);
            }
            gaps[split] = old;
        }
    }

    /// Ids of all points within `radius` of `q` (inclusive), ascending.
    pub fn within(&self, space: &FactoredSpace, q: &[f64], radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if self.nodes.is_empty() {
            return out;
        }
        let mut gaps = vec![0.0; self.dim];
        let mut scratch = vec![0.0; self.dim];
        self.within_rec(space, 0, q, radius, &mut gaps, &mut scratch, &mut out);
        out.sort_unstable();
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn within_rec(
        &self,
        space: &FactoredSpace,
        node: usize,
        q: &[f64],
        radius: f64,
        gaps: &mut [f64],
        scratch: &mut [f64],
        out: &mut Vec<usize>,
    ) {
        let p = self.point(node);
        for (s, (a, b)) in scratch.iter_mut().zip(q.iter().zip(p)) {
            *s = (a - b).abs();
        }
        if space.distance_from_gaps(scratch) <= radius {
            out.push(node);
        }
        let n = self.nodes[node];
        let split = n.split as usize;
        let diff = q[split] - p[split];
        let (near, far) = if diff < 0.0 { (n.left, n.right) } else { (n.right, n.left) };
        if near != NIL {
            self.within_rec(space, near as usize, q, radius, gaps, scratch, out);
        }
        if far != NIL {
            let old = gaps[split];
            gaps[split] = diff.abs();
            if space.distance_from_gaps(gaps) <= radius {
                self.within_rec(space, far as usize, q, radius, gaps, scratch, out);
            }
            gaps[split] = old;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn space() -> FactoredSpace {
        FactoredSpace::new(vec![vec![0, 1], vec![2]], vec![(0.0, 1.0); 3])
            .unwrap()
            .with_weights(vec![1.0, 2.0, 0.5])
            .unwrap()
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            pts in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 3), 1..200),
            q in prop::collection::vec(0.0f64..1.0, 3),
            radius in 0.0f64..0.8,
        ) {
            let s = space();
            let mut tree = KdTree::new(3);
            for p in &pts {
                tree.insert(p);
            }
            let (id, d) = tree.nearest(&s, &q).unwrap();
            let brute = pts
                .iter()
                .enumerate()
                .map(|(k, p)| (k, s.distance(&q, p)))
                .fold((usize::MAX, f64::INFINITY), |b, (k, d)| if d < b.1 { (k, d) } else { b });
            prop_assert_eq!(d, brute.1);
            prop_assert_eq!(id, brute.0);

            let expect: Vec<usize> = pts
                .iter()
                .enumerate()
                .filter(|(_, p)| s.distance(&q, p) <= radius)
                .map(|(k, _)| k)
                .collect();
            prop_assert_eq!(tree.within(&s, &q, radius), expect);
        }
    }

    #[test]
    fn duplicate_points() {
        let s = space();
        let mut tree = KdTree::new(3);
        for _ in 0..5 {
            tree.insert(&[0.5, 0.5, 0.5]);
        }
        assert_eq!(tree.nearest(&s, &[0.5, 0.5, 0.5]), Some((0, 0.0)));
        assert_eq!(tree.within(&s, &[0.5, 0.5, 0.5], 0.0).len(), 5);
    }
}
