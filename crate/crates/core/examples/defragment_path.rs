//! Takes a fragmented but valid path, as a bidirectional search typically
//! returns, and defragments it into fewer actions.

use larrt::baselines::rrt_connect_plan;
use larrt::defrag::{blocks, defragment};
use larrt::scenario::load_scenario;

fn main() -> larrt::Result<()> {
    let sc = load_scenario("maze-3-doors")?;
    let space = sc.scene.space();
    let mut cfg = sc.planner_config(7);
    cfg.max_extend_distance = Some(0.5);
    let raw = rrt_connect_plan(&sc.scene, &sc.start, &sc.goal, &cfg)?
        .best_path
        .expect("no solution within the budget");

    let before: Vec<usize> = blocks(&raw).iter().map(|b| b.factor).collect();
    println!("raw path {} ({} blocks: {before:?})", raw.cost(space)?, before.len());

    let clean = defragment(&raw, &sc.scene, &sc.goal);
    let after: Vec<usize> = blocks(&clean).iter().map(|b| b.factor).collect();
    println!("defragmented {} ({} blocks: {after:?})", clean.cost(space)?, after.len());
    Ok(())
}
