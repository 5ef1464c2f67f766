//! Plans the two-body toy problem with the action-minimising planner and
//! prints the cost trace. The optimal plan lifts the blocker once and then
//! slides the cube through in a single motion.

use larrt::planner::plan;
use larrt::scenario::load_scenario;

fn main() -> larrt::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let sc = load_scenario("fig3-toy")?;
    let cfg = sc.planner_config(seed).with_budget(2.0);
    let result = plan(&sc.scene, &sc.start, &sc.goal, &cfg)?;

    for e in &result.cost_trace {
        println!("{:>8.4}s  {}", e.time_s, e.cost);
    }
    let path = result.best_path.expect("no solution within the budget");
    println!("{} iterations, final {}", result.iterations, path.cost(sc.scene.space())?);
    for (k, s) in path.states().iter().enumerate() {
        let via = if k == 0 { String::new() } else { format!(" via factor {}", path.edge_factor(k - 1)) };
        println!("  {:?}{via}", s.values());
    }
    Ok(())
}
