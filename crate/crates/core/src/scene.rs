//! Planar kinematic scenes: joint vectors drive box-shaped bodies, and states
//! and motions are validated against pairwise box overlap.

use crate::error::{Error, Result};
use crate::geometry::{Obb, Pose, Vec2};
use crate::space::{lerp, FactoredSpace};

/// Default motion-check resolution in weighted joint units.
pub const DEFAULT_RESOLUTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BodyKind {
    Static,
    Movable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Body {
    pub name: String,
    pub half_extents: Vec2,
    pub base_pose: Pose,
    pub kind: BodyKind,
}

impl Body {
    pub fn new(name: impl Into<String>, half_extents: (f64, f64), base_pose: Pose, kind: BodyKind) -> Self {
        Body {
            name: name.into(),
            half_extents: Vec2::new(half_extents.0, half_extents.1),
            base_pose,
            kind,
        }
    }

    pub fn wall(name: impl Into<String>, center: (f64, f64), half_extents: (f64, f64)) -> Self {
        Body::new(name, half_extents, Pose::new(center.0, center.1, 0.0), BodyKind::Static)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JointModel {
    /// Translation by the joint value along a world-frame axis (normalised on construction).
    Prismatic { axis: Vec2 },
    /// Rotation by the joint value about a world-frame anchor point.
    Revolute { anchor: Vec2 },
}

impl JointModel {
    fn transform(&self, value: f64) -> Pose {
        match *self {
            JointModel::Prismatic { axis } => Pose::translation(axis * value),
            JointModel::Revolute { anchor } => Pose::rotation_about(anchor, value),
        }
    }
}

/// Joints driving one body. Joint transforms compose as a serial chain in
/// listed order: later joints ride on earlier ones.
#[derive(Debug, Clone, PartialEq)]
pub struct JointBinding {
    pub body: usize,
    pub joints: Vec<(usize, JointModel)>,
}

#[derive(Debug, Clone)]
pub struct Scene {
    space: FactoredSpace,
    bodies: Vec<Body>,
    bindings: Vec<JointBinding>,
    binding_of_body: Vec<Option<usize>>,
    pairs: Vec<(usize, usize)>,
    /// Bodies driven by each factor.
    factor_bodies: Vec<Vec<usize>>,
    /// Collision pairs involving at least one body driven by the factor.
    factor_pairs: Vec<Vec<(usize, usize)>>,
    base_boxes: Vec<Obb>,
    resolution: f64,
}

impl Scene {
    /// Collision pairs are every movable-static and movable-movable pair,
    /// minus `ignore` (pairs of body indices, either order).
    pub fn new(
        space: FactoredSpace,
        bodies: Vec<Body>,
        bindings: Vec<JointBinding>,
        ignore: &[(usize, usize)],
    ) -> Result<Self> {
        let nb = bodies.len();
        for b in &bodies {
            if !(b.half_extents.x > 0.0 && b.half_extents.y > 0.0) {
                return Err(Error::InvalidScene(format!(
                    "body `{}` needs positive half extents",
                    b.name
                )));
            }
        }
        let mut binding_of_body = vec![None; nb];
        let mut driver = vec![None; space.dim()];
        for (k, binding) in bindings.iter().enumerate() {
            let body = bodies.get(binding.body).ok_or_else(|| {
                Error::InvalidScene(format!("binding {k} references body {}", binding.body))
            })?;
            if body.kind == BodyKind::Static {
                return Err(Error::InvalidScene(format!(
                    "static body `{}` cannot be driven by joints",
                    body.name
                )));
            }
            if binding_of_body[binding.body].replace(k).is_some() {
                return Err(Error::InvalidScene(format!(
                    "body `{}` has more than one binding",
                    body.name
                )));
            }
            if binding.joints.is_empty() {
                return Err(Error::InvalidScene(format!("binding of `{}` has no joints", body.name)));
            }
            for &(idx, model) in &binding.joints {
                if idx >= space.dim() {
                    return Err(Error::InvalidScene(format!(
                        "body `{}` is driven by index {idx}, space has {} dimensions",
                        body.name,
                        space.dim()
                    )));
                }
                if driver[idx].replace(binding.body).is_some() {
                    return Err(Error::InvalidScene(format!(
                        "state index {idx} drives more than one joint"
                    )));
                }
                if let JointModel::Prismatic { axis } = model {
                    if axis.norm() == 0.0 {
                        return Err(Error::InvalidScene(format!(
                            "prismatic joint of index {idx} has a zero axis"
                        )));
                    }
                }
            }
        }
        if let Some(i) = driver.iter().position(Option::is_none) {
            return Err(Error::InvalidScene(format!("state index {i} drives no body")));
        }
        if let Some(b) = (0..nb).find(|&b| bodies[b].kind == BodyKind::Movable && binding_of_body[b].is_none()) {
            return Err(Error::InvalidScene(format!(
                "movable body `{}` is not driven by any state index",
                bodies[b].name
            )));
        }
        for &(a, b) in ignore {
            if a >= nb || b >= nb {
                return Err(Error::InvalidScene(format!("ignore pair ({a}, {b}) out of range")));
            }
        }

        let bindings: Vec<JointBinding> = bindings
            .into_iter()
            .map(|mut b| {
                for (_, model) in &mut b.joints {
                    if let JointModel::Prismatic { axis } = model {
                        *axis = *axis * (1.0 / axis.norm());
                    }
                }
                b
            })
            .collect();

        let ignored = |a: usize, b: usize| ignore.iter().any(|&(p, q)| (p, q) == (a, b) || (q, p) == (a, b));
        let mut pairs = Vec::new();
        for a in 0..nb {
            for b in (a + 1)..nb {
                let any_movable = bodies[a].kind == BodyKind::Movable || bodies[b].kind == BodyKind::Movable;
                if any_movable && !ignored(a, b) {
                    pairs.push((a, b));
                }
            }
        }

        let mut factor_bodies = vec![Vec::new(); space.num_factors()];
        let mut factor_pairs = vec![Vec::new(); space.num_factors()];
        for (f, members) in space.factors().iter().enumerate() {
            let mut moved: Vec<usize> = members.iter().filter_map(|&i| driver[i]).collect();
            moved.sort_unstable();
            moved.dedup();
            factor_pairs[f] = pairs
                .iter()
                .copied()
                .filter(|(a, b)| moved.contains(a) || moved.contains(b))
                .collect();
            factor_bodies[f] = moved;
        }

        let base_boxes = bodies.iter().map(|b| Obb::new(b.base_pose, b.half_extents)).collect();
        Ok(Scene {
            space,
            bodies,
            bindings,
            binding_of_body,
            pairs,
            factor_bodies,
            factor_pairs,
            base_boxes,
            resolution: DEFAULT_RESOLUTION,
        })
    }

    pub fn with_resolution(mut self, resolution: f64) -> Result<Self> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::InvalidScene(format!("resolution must be positive, got {resolution}")));
        }
        self.resolution = resolution;
        Ok(self)
    }

    pub fn space(&self) -> &FactoredSpace {
        &self.space
    }

    pub fn bodies(&self) -> &[Body] {
        &self.bodies
    }

    pub fn bindings(&self) -> &[JointBinding] {
        &self.bindings
    }

    pub fn collision_pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn body_index(&self, name: &str) -> Option<usize> {
        self.bodies.iter().position(|b| b.name == name)
    }

    pub fn body_pose(&self, body: usize, x: &[f64]) -> Pose {
        let base = self.bodies[body].base_pose;
        match self.binding_of_body[body] {
            None => base,
            Some(k) => {
                let chain = self.bindings[k]
                    .joints
                    .iter()
                    .fold(Pose::IDENTITY, |acc, (idx, model)| acc.compose(&model.transform(x[*idx])));
                chain.compose(&base)
            }
        }
    }

    fn body_box(&self, body: usize, x: &[f64]) -> Obb {
        if self.binding_of_body[body].is_none() {
            self.base_boxes[body]
        } else {
            Obb::new(self.body_pose(body, x), self.bodies[body].half_extents)
        }
    }

    /// World-frame boxes of all bodies at `x`.
    pub fn forward_kinematics(&self, x: &[f64]) -> Vec<Obb> {
        (0..self.bodies.len()).map(|b| self.body_box(b, x)).collect()
    }

    fn pairs_clear(&self, boxes: &[Obb], pairs: &[(usize, usize)]) -> bool {
        pairs.iter().all(|&(a, b)| !boxes[a].intersects(&boxes[b]))
    }

    /// The colliding pairs at `x`, for diagnostics.
    pub fn colliding_pairs(&self, x: &[f64]) -> Vec<(usize, usize)> {
        let boxes = self.forward_kinematics(x);
        self.pairs
            .iter()
            .copied()
            .filter(|&(a, b)| boxes[a].intersects(&boxes[b]))
            .collect()
    }

    /// In bounds and collision-free. Touching boxes count as colliding.
    pub fn is_state_valid(&self, x: &[f64]) -> bool {
        if !self.space.contains(x) {
            return false;
        }
        let boxes = self.forward_kinematics(x);
        self.pairs_clear(&boxes, &self.pairs)
    }

    /// Checks the factor-by-factor motion from `a` to `b` under `order` at a
    /// step of at most `resolution` in weighted distance. Collisions that
    /// appear and vanish between two checked waypoints are not detected.
    pub fn is_motion_valid(&self, a: &[f64], b: &[f64], order: &[usize]) -> bool {
        if !self.is_state_valid(a) || !self.space.contains(b) {
            return false;
        }
        // Pairs untouched by the moving factor keep the configuration they had
        // at the segment start, which is valid by induction from `a`.
        let mut cur = a.to_vec();
        let mut boxes = self.forward_kinematics(a);
        for &f in order {
            let d = self.space.factor_distance(f, a, b);
            if d == 0.0 {
                continue;
            }
            let members = self.space.factor(f);
            let steps = (d / self.resolution).ceil().max(1.0) as usize;
            for k in 1..=steps {
                let s = k as f64 / steps as f64;
                for &i in members {
                    cur[i] = lerp(a[i], b[i], s);
                }
                for &body in &self.factor_bodies[f] {
                    boxes[body] = self.body_box(body, &cur);
                }
                if !self.pairs_clear(&boxes, &self.factor_pairs[f]) {
                    return false;
                }
            }
        }
        true
    }

    /// Motion check for an edge that changes at most one factor (order is irrelevant).
    pub fn is_edge_valid(&self, a: &[f64], b: &[f64]) -> bool {
        let changed = self.space.changed_factors_tol(a, b, 0.0);
        self.is_motion_valid(a, b, &changed)
    }
}
