//! Runs the three planners on one scenario with the same budget and compares
//! their final costs. RRT* minimises path length, so it rarely finds the
//! plan with the fewest actions.

use larrt::bench::{run_trial, BenchConfig, PlannerKind};
use larrt::scenario::load_scenario;

fn main() -> larrt::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "maze-slider-obstacle".into());
    let sc = load_scenario(&name)?;
    let cfg = BenchConfig {
        budget_s: Some(3.0),
        ..BenchConfig::default()
    };
    for planner in PlannerKind::ALL {
        let r = run_trial(&sc, planner, 0, &cfg);
        match (r.cost, r.time_to_first_s) {
            (Some(c), Some(t)) => println!("{:<12} {c}  first solution after {t:.3}s", planner.name()),
            _ => println!("{:<12} no solution", planner.name()),
        }
    }
    println!("best known: {} actions", sc.meta.best_known_actions);
    Ok(())
}
