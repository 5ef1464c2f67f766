//! Interpolation in a factored space moves one factor at a time, in the
//! given order, and the distance is the sum of per-factor distances.

use larrt::{FactoredSpace, State};

fn main() -> larrt::Result<()> {
    // Factor 0 is a planar position (x, y), factor 1 a single door angle.
    let space = FactoredSpace::new(vec![vec![0, 1], vec![2]], vec![(0.0, 4.0), (0.0, 4.0), (-1.6, 1.6)])?;
    let a = State::new(vec![0.0, 0.0, 0.0]);
    let b = State::new(vec![3.0, 4.0, 1.0]);

    println!("per-factor distances {:?}", space.factor_distances(&a, &b));
    println!("distance {}", space.distance(&a, &b));
    println!("cost {}", space.motion_cost(&a, &b));

    for order in [vec![0, 1], vec![1, 0]] {
        println!("order {order:?}");
        for (f, lo, hi) in space.segments(&a, &b, &order) {
            println!("  factor {f} moves for t in [{lo:.3}, {hi:.3}]");
        }
        for k in 0..=4 {
            let t = k as f64 / 4.0;
            println!("  t={t:.2} {:?}", space.interpolate(&a, &b, t, &order).values());
        }
    }
    Ok(())
}
