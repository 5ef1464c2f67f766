//! Planar rigid transforms and oriented boxes with a separating-axis overlap test.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn rotate(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

/// Planar rigid transform: rotation by `theta` followed by translation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub const IDENTITY: Pose = Pose {
        x: 0.0,
        y: 0.0,
        theta: 0.0,
    };

    pub const fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose { x, y, theta }
    }

    pub fn translation(v: Vec2) -> Self {
        Pose::new(v.x, v.y, 0.0)
    }

    /// Rotation by `angle` about the fixed point `pivot`.
    pub fn rotation_about(pivot: Vec2, angle: f64) -> Self {
        let r = pivot.rotate(angle);
        Pose::new(pivot.x - r.x, pivot.y - r.y, angle)
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn apply(&self, p: Vec2) -> Vec2 {
        p.rotate(self.theta) + self.position()
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Pose) -> Pose {
        let p = self.apply(other.position());
        Pose::new(p.x, p.y, self.theta + other.theta)
    }
}

/// Oriented box with cached unit axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obb {
    pub center: Vec2,
    pub half: Vec2,
    axes: [Vec2; 2],
}

impl Obb {
    pub fn new(pose: Pose, half: Vec2) -> Self {
        let (s, c) = pose.theta.sin_cos();
        Obb {
            center: pose.position(),
            half,
            axes: [Vec2::new(c, s), Vec2::new(-s, c)],
        }
    }

    pub fn axes(&self) -> [Vec2; 2] {
        self.axes
    }

    pub fn corners(&self) -> [Vec2; 4] {
        let u = self.axes[0] * self.half.x;
        let v = self.axes[1] * self.half.y;
        [
            self.center + u + v,
            self.center - u + v,
            self.center - u - v,
            self.center + u - v,
        ]
    }

    /// Half-width of the projection of the box onto `axis` (unit length).
    fn radius_along(&self, axis: Vec2) -> f64 {
        self.half.x * self.axes[0].dot(axis).abs() + self.half.y * self.axes[1].dot(axis).abs()
    }

    /// Half-extents of the axis-aligned bounding box.
    pub fn aabb_half(&self) -> Vec2 {
        Vec2::new(
            self.radius_along(Vec2::new(1.0, 0.0)),
            self.radius_along(Vec2::new(0.0, 1.0)),
        )
    }

    /// Closed overlap test: boxes that merely touch are reported as intersecting.
    pub fn intersects(&self, other: &Obb) -> bool {
        let delta = other.center - self.center;
        let ha = self.aabb_half();
        let hb = other.aabb_half();
        if delta.x.abs() > ha.x + hb.x || delta.y.abs() > ha.y + hb.y {
            return false;
        }
        for axis in self.axes.iter().chain(other.axes.iter()) {
            let gap = delta.dot(*axis).abs();
            if gap > self.radius_along(*axis) + other.radius_along(*axis) {
                return false;
            }
        }
        true
    }
}
