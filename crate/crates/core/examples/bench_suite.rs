//! A small reproducible benchmark over the built-in suite: a virtual clock
//! makes every run deterministic. Writes bench.csv and one SVG per scenario.
//! The short budget is too small for the escape rooms, which mostly fail here.

use std::path::PathBuf;

use larrt::bench::{run_bench, summarize, write_outputs, BenchConfig, PlannerKind};
use larrt::planner::Clock;
use larrt::scenario::{builtin_names, load_scenario};

fn main() -> larrt::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "larrt-out/bench-example".into()));
    let scenarios = builtin_names()
        .into_iter()
        .map(load_scenario)
        .collect::<larrt::Result<Vec<_>>>()?;
    let cfg = BenchConfig {
        trials: 3,
        budget_s: Some(2.0),
        clock: Clock::Virtual {
            iterations_per_second: 500.0,
        },
        ..BenchConfig::default()
    };
    let records = run_bench(&scenarios, &PlannerKind::ALL, &cfg);
    let outputs = write_outputs(&out, &records)?;
    for s in summarize(&outputs.rows) {
        let actions = s.median_actions.map_or("-".into(), |a| a.to_string());
        println!(
            "{:<22} {:<12} solved {}/{}  median actions {actions}",
            s.scenario, s.planner, s.successes, s.trials
        );
    }
    println!("wrote {}", outputs.csv.display());
    Ok(())
}
