//! Small scenes shared by unit tests.

use crate::geometry::{Pose, Vec2};
use crate::scene::{Body, BodyKind, JointBinding, JointModel, Scene};
use crate::space::FactoredSpace;

/// `n` one-dimensional factors on `[0, 10]`, each moving a tiny body on its
/// own far-apart lane, so nothing ever collides.
pub fn free_scene(n: usize) -> Scene {
    let space = FactoredSpace::new((0..n).map(|i| vec![i]).collect(), vec![(0.0, 10.0); n]).unwrap();
    let bodies = (0..n)
        .map(|i| Body::new(format!("b{i}"), (0.01, 0.01), Pose::new(0.0, 100.0 * i as f64, 0.0), BodyKind::Movable))
        .collect();
    let bindings = (0..n)
        .map(|i| JointBinding {
            body: i,
            joints: vec![(i, JointModel::Prismatic { axis: Vec2::new(1.0, 0.0) })],
        })
        .collect();
    Scene::new(space, bodies, bindings, &[]).unwrap()
}

/// Cube (factor 0) on an x rail `[0, 3]` and a blocker (factor 1) on a
/// y rail `[0, 1]` at x = 1.5. The cube passes only when the blocker is up.
pub fn blocker_scene() -> Scene {
    let space = FactoredSpace::new(vec![vec![0], vec![1]], vec![(0.0, 3.0), (0.0, 1.0)]).unwrap();
    let bodies = vec![
        Body::new("cube", (0.2, 0.2), Pose::IDENTITY, BodyKind::Movable),
        Body::new("blocker", (0.2, 0.2), Pose::new(1.5, 0.0, 0.0), BodyKind::Movable),
    ];
    let bindings = vec![
        JointBinding {
            body: 0,
            joints: vec![(0, JointModel::Prismatic { axis: Vec2::new(1.0, 0.0) })],
        },
        JointBinding {
            body: 1,
            joints: vec![(1, JointModel::Prismatic { axis: Vec2::new(0.0, 1.0) })],
        },
    ];
    Scene::new(space, bodies, bindings, &[]).unwrap()
}
