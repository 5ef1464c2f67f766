//! Command-line front end shared by the `larrt` binary and the integration tests.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bench::{run_bench, summarize, write_outputs, BenchConfig, PlannerKind};
use crate::defrag::defragment;
use crate::error::{Error, Result};
use crate::oracle::oracle_solve;
use crate::pathfile::{load_path, save_path, verify_path};
use crate::planner::Clock;
use crate::scenario::{builtin_names, load_scenario, Scenario};

#[derive(Debug, Parser)]
#[command(name = "larrt", version, about = "Action-count optimal planning over factored state spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct OutDir {
    /// Directory for written artifacts.
    #[arg(long, env = "LARRT_OUT_DIR", default_value = "larrt-out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plan once and write the path and a summary.
    Plan {
        /// Built-in scenario name or path to a scenario file.
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value = "larrt")]
        planner: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Time budget; defaults to the scenario's own.
        #[arg(long)]
        budget_s: Option<f64>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Run seeded trials and write bench.csv plus one SVG per scenario.
    Bench {
        /// Repeatable; defaults to every built-in scenario.
        #[arg(long)]
        scenario: Vec<String>,
        /// Repeatable; defaults to larrt and rrtstar.
        #[arg(long)]
        planner: Vec<String>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Seed of the first trial; trial k uses seed + k.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        budget_s: Option<f64>,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        /// 100 trials of 100 s (300 s for the escape rooms).
        #[arg(long, conflicts_with_all = ["trials", "budget_s"])]
        full: bool,
        /// Measure time in iterations at this rate instead of wall time; makes reruns identical.
        #[arg(long)]
        virtual_clock: Option<f64>,
        /// End a trial when it reaches the scenario's best-known action count.
        #[arg(long)]
        stop_at_best: bool,
        #[command(flatten)]
        out: OutDir,
    },
    /// Solve a scenario exactly on its lattice.
    Oracle {
        #[arg(long)]
        scenario: String,
        /// Comma-separated step per joint; defaults to the scenario's.
        #[arg(long, value_delimiter = ',')]
        resolution: Option<Vec<f64>>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Defragment a path file and report the cost before and after.
    Defrag {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        path: PathBuf,
        #[command(flatten)]
        out: OutDir,
    },
    /// Replay a path file through collision and goal checks.
    Verify {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        path: PathBuf,
    },
    /// List the built-in scenarios.
    ListScenarios,
}

/// Runs a parsed command, writing reports to `out` and diagnostics to `err`.
/// Returns the process exit code.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Plan {
            scenario,
            planner,
            seed,
            budget_s,
            out: dir,
        } => cmd_plan(&scenario, &planner, seed, budget_s, &dir.out_dir, out),
        Command::Bench {
            scenario,
            planner,
            trials,
            seed,
            budget_s,
            parallel,
            full,
            virtual_clock,
            stop_at_best,
            out: dir,
        } => {
            let names = if scenario.is_empty() {
                builtin_names().into_iter().map(String::from).collect()
            } else {
                scenario
            };
            let planners = if planner.is_empty() {
                vec![PlannerKind::LaRrt, PlannerKind::RrtStar]
            } else {
                planner.iter().map(|p| p.parse()).collect::<Result<Vec<_>>>()?
            };
            let cfg = BenchConfig {
                trials: if full { 100 } else { trials },
                seed_base: seed,
                budget_s,
                clock: match virtual_clock {
                    Some(ips) => Clock::Virtual {
                        iterations_per_second: ips,
                    },
                    None => Clock::Wall,
                },
                parallel,
                stop_at_best,
            };
            cmd_bench(&names, &planners, &cfg, full, &dir.out_dir, out, err)
        }
        Command::Oracle {
            scenario,
            resolution,
            out: dir,
        } => cmd_oracle(&scenario, resolution, &dir.out_dir, out),
        Command::Defrag {
            scenario,
            path,
            out: dir,
        } => cmd_defrag(&scenario, &path, &dir.out_dir, out),
        Command::Verify { scenario, path } => cmd_verify(&scenario, &path, out, err),
        Command::ListScenarios => list_scenarios(out),
    }
}

fn io_out(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn cmd_plan(
    scenario: &str,
    planner: &str,
    seed: u64,
    budget_s: Option<f64>,
    out_dir: &Path,
    out: &mut dyn Write,
) -> Result<i32> {
    let planner: PlannerKind = planner.parse()?;
    let sc = load_scenario(scenario)?;
    ensure_dir(out_dir)?;
    let mut cfg = sc.planner_config(seed);
    if let Some(b) = budget_s {
        cfg.time_budget_s = b;
    }
    let result = planner.run(&sc.scene, &sc.start, &sc.goal, &cfg)?;
    let stem = format!("{}-{}-{}", sc.meta.name, planner, seed);
    let mut summary = format!(
        "scenario={} planner={} seed={}\ntermination={:?} iterations={} elapsed_s={:.3}\n",
        sc.meta.name, planner, seed, result.termination, result.iterations, result.elapsed_s
    );
    let code = match (&result.best_path, result.best_cost) {
        (Some(path), Some(cost)) => {
            let file = out_dir.join(format!("{stem}.path"));
            save_path(&file, path)?;
            summary.push_str(&format!(
                "solved {cost}\ntime_to_first_s={:.3}\nbest_known_actions={}\npath={}\n",
                result.time_to_first_s.unwrap_or(0.0),
                sc.meta.best_known_actions,
                file.display()
            ));
            0
        }
        _ => {
            summary.push_str("no solution within budget\n");
            1
        }
    };
    let file = out_dir.join(format!("{stem}.summary.txt"));
    std::fs::write(&file, &summary).map_err(|e| Error::io(&file, e))?;
    out.write_all(summary.as_bytes()).map_err(io_out)?;
    Ok(code)
}

pub fn cmd_bench(
    names: &[String],
    planners: &[PlannerKind],
    cfg: &BenchConfig,
    full: bool,
    out_dir: &Path,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    if cfg.trials == 0 {
        return Err(Error::InvalidScene("bench needs at least one trial".into()));
    }
    let scenarios: Vec<Scenario> = names.iter().map(|n| load_scenario(n)).collect::<Result<_>>()?;
    ensure_dir(out_dir)?;
    let mut records = Vec::new();
    for sc in &scenarios {
        let mut c = cfg.clone();
        if full {
            c.budget_s = Some(if sc.meta.name.starts_with("escape-room") { 300.0 } else { 100.0 });
        }
        records.extend(run_bench(std::slice::from_ref(sc), planners, &c));
    }
    for r in records.iter().filter(|r| r.error.is_some()) {
        writeln!(err, "{} {} seed {}: {}", r.scenario, r.planner, r.seed, r.error.as_deref().unwrap_or("")).map_err(io_out)?;
    }
    let outputs = write_outputs(out_dir, &records)?;
    writeln!(out, "{:<22} {:<11} {:>8} {:>14} {:>14}", "scenario", "planner", "success", "median actions", "median first s").map_err(io_out)?;
    for s in summarize(&outputs.rows) {
        let fmt = |v: Option<f64>, p: usize| v.map(|x| format!("{x:.p$}")).unwrap_or_else(|| "-".into());
        writeln!(
            out,
            "{:<22} {:<11} {:>8} {:>14} {:>14}",
            s.scenario,
            s.planner,
            format!("{}/{}", s.successes, s.trials),
            fmt(s.median_actions, 1),
            fmt(s.median_time_to_first_s, 3)
        )
        .map_err(io_out)?;
    }
    writeln!(out, "wrote {}", outputs.csv.display()).map_err(io_out)?;
    for p in &outputs.plots {
        writeln!(out, "wrote {}", p.display()).map_err(io_out)?;
    }
    Ok(0)
}

pub fn cmd_oracle(scenario: &str, resolution: Option<Vec<f64>>, out_dir: &Path, out: &mut dyn Write) -> Result<i32> {
    let sc = load_scenario(scenario)?;
    let res = resolution.unwrap_or_else(|| sc.oracle_resolution());
    sc.scene.space().check_dim(&res)?;
    match oracle_solve(&sc.scene, &sc.start, &sc.goal, &res)? {
        Some(sol) => {
            ensure_dir(out_dir)?;
            let file = out_dir.join(format!("{}-oracle.path", sc.meta.name));
            save_path(&file, &sol.path)?;
            writeln!(
                out,
                "scenario={} oracle {}\nlattice_nodes={} expanded={}\nbest_known_actions={}\npath={}",
                sc.meta.name,
                sol.cost,
                sol.lattice_nodes,
                sol.expanded,
                sc.meta.best_known_actions,
                file.display()
            )
            .map_err(io_out)?;
            Ok(0)
        }
        None => {
            writeln!(out, "scenario={} oracle: no lattice path reaches the goal", sc.meta.name).map_err(io_out)?;
            Ok(1)
        }
    }
}

pub fn cmd_defrag(scenario: &str, path_file: &Path, out_dir: &Path, out: &mut dyn Write) -> Result<i32> {
    let sc = load_scenario(scenario)?;
    let path = load_path(path_file)?;
    sc.scene.space().check_dim(path.start())?;
    let space = sc.scene.space();
    let Ok(before) = path.cost(space) else {
        writeln!(out, "path is not isolated; nothing to defragment").map_err(io_out)?;
        return Ok(1);
    };
    let after_path = defragment(&path, &sc.scene, &sc.goal);
    let after = after_path.cost(space)?;
    ensure_dir(out_dir)?;
    let stem = path_file.file_stem().and_then(|s| s.to_str()).unwrap_or("path");
    let file = out_dir.join(format!("{stem}.defrag.path"));
    save_path(&file, &after_path)?;
    writeln!(out, "before {before}\nafter  {after}\npath={}", file.display()).map_err(io_out)?;
    Ok(0)
}

pub fn cmd_verify(scenario: &str, path_file: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let sc = load_scenario(scenario)?;
    let path = load_path(path_file)?;
    match verify_path(&sc.scene, &sc.start, &sc.goal, &path) {
        Ok(cost) => {
            writeln!(out, "ok {cost}").map_err(io_out)?;
            Ok(0)
        }
        Err(f) => {
            writeln!(err, "verification failed: {f}").map_err(io_out)?;
            Ok(1)
        }
    }
}

pub fn list_scenarios(out: &mut dyn Write) -> Result<i32> {
    writeln!(out, "{:<22} {:>6} {:>8} {:>9}", "name", "best", "source", "budget_s").map_err(io_out)?;
    for name in builtin_names() {
        let sc = load_scenario(name)?;
        writeln!(
            out,
            "{:<22} {:>6} {:>8} {:>9}",
            name, sc.meta.best_known_actions, sc.meta.source, sc.meta.time_budget_s
        )
        .map_err(io_out)?;
    }
    Ok(0)
}
