//! Solves a scenario exactly on a lattice, giving the minimum number of
//! actions at that resolution.

use larrt::oracle::oracle_solve;
use larrt::scenario::load_scenario;

fn main() -> larrt::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "maze-slider-obstacle".into());
    let sc = load_scenario(&name)?;
    let resolution = sc.oracle_resolution();
    println!("{name}: lattice resolution {resolution:?}");
    match oracle_solve(&sc.scene, &sc.start, &sc.goal, &resolution)? {
        Some(sol) => {
            println!("optimum {} ({} nodes expanded, lattice of {})", sol.cost, sol.expanded, sol.lattice_nodes);
            println!("best known {}", sc.meta.best_known_actions);
        }
        None => println!("no solution on this lattice"),
    }
    Ok(())
}
