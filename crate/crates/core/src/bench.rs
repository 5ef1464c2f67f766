//! Seeded multi-trial benchmarking: CSV records, success and cost curves, SVG plots.
//!
//! Every aggregate is computed from rows parsed back out of the CSV, so the
//! plots carry no information that the CSV does not.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::baselines::{rrt_connect_plan, rrt_star_plan};
use crate::error::{Error, Result};
use crate::pathfile::verify_path;
use crate::planner::{plan, Clock, PlanResult, PlannerConfig, TraceEntry};
use crate::scenario::Scenario;
use crate::scene::Scene;
use crate::space::{CostTriple, FactoredPath, GoalSpec};

pub const CSV_HEADER: [&str; 9] = [
    "scenario",
    "planner",
    "seed",
    "success",
    "time_to_first_s",
    "actions",
    "additive",
    "dist",
    "trace",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PlannerKind {
    LaRrt,
    RrtStar,
    RrtConnect,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 3] = [PlannerKind::LaRrt, PlannerKind::RrtStar, PlannerKind::RrtConnect];

    pub fn name(self) -> &'static str {
        match self {
            PlannerKind::LaRrt => "larrt",
            PlannerKind::RrtStar => "rrtstar",
            PlannerKind::RrtConnect => "rrtconnect",
        }
    }

    pub fn run(self, scene: &Scene, start: &[f64], goal: &GoalSpec, cfg: &PlannerConfig) -> Result<PlanResult> {
        match self {
            PlannerKind::LaRrt => plan(scene, start, goal, cfg),
            PlannerKind::RrtStar => rrt_star_plan(scene, start, goal, cfg),
            PlannerKind::RrtConnect => rrt_connect_plan(scene, start, goal, cfg),
        }
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlannerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PlannerKind::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPlanner(s.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub trials: usize,
    pub seed_base: u64,
    /// Overrides each scenario's own time budget.
    pub budget_s: Option<f64>,
    pub clock: Clock,
    /// Worker threads; 1 runs the trials serially.
    pub parallel: usize,
    /// Stop a trial once it reaches the scenario's best-known action count.
    pub stop_at_best: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            trials: 20,
            seed_base: 0,
            budget_s: None,
            clock: Clock::Wall,
            parallel: 1,
            stop_at_best: false,
        }
    }
}

impl BenchConfig {
    pub fn planner_config(&self, scenario: &Scenario, seed: u64) -> PlannerConfig {
        let mut cfg = scenario.planner_config(seed);
        if let Some(b) = self.budget_s {
            cfg.time_budget_s = b;
        }
        cfg.clock = self.clock;
        if self.stop_at_best {
            cfg.stop_at_actions = Some(scenario.meta.best_known_actions);
        }
        cfg
    }
}

/// One trial. `success` means a path was returned and it passed [`verify_path`].
#[derive(Debug, Clone)]
pub struct BenchRecord {
    pub scenario: String,
    pub planner: PlannerKind,
    pub seed: u64,
    pub success: bool,
    pub time_to_first_s: Option<f64>,
    pub cost: Option<CostTriple>,
    pub trace: Vec<TraceEntry>,
    pub path: Option<FactoredPath>,
    pub budget_s: f64,
    /// Planner error or verification failure, if any.
    pub error: Option<String>,
}

pub fn run_trial(scenario: &Scenario, planner: PlannerKind, seed: u64, cfg: &BenchConfig) -> BenchRecord {
    let pc = cfg.planner_config(scenario, seed);
    let mut record = BenchRecord {
        scenario: scenario.meta.name.clone(),
        planner,
        seed,
        success: false,
        time_to_first_s: None,
        cost: None,
        trace: Vec::new(),
        path: None,
        budget_s: pc.time_budget_s,
        error: None,
    };
    match planner.run(&scenario.scene, &scenario.start, &scenario.goal, &pc) {
        Ok(result) => {
            record.time_to_first_s = result.time_to_first_s;
            record.trace = result.cost_trace;
            record.cost = result.best_cost;
            if let Some(path) = result.best_path {
                match verify_path(&scenario.scene, &scenario.start, &scenario.goal, &path) {
                    Ok(_) => record.success = true,
                    Err(e) => record.error = Some(format!("returned path fails verification: {e}")),
                }
                record.path = Some(path);
            }
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record
}

/// Runs `cfg.trials` trials per (scenario, planner) with seeds
/// `seed_base + trial`. Records come back sorted by scenario order, planner
/// order and seed regardless of parallelism.
pub fn run_bench(scenarios: &[Scenario], planners: &[PlannerKind], cfg: &BenchConfig) -> Vec<BenchRecord> {
    let mut jobs = Vec::new();
    for (si, _) in scenarios.iter().enumerate() {
        for (pi, &p) in planners.iter().enumerate() {
            for t in 0..cfg.trials {
                jobs.push((si, pi, p, cfg.seed_base + t as u64));
            }
        }
    }
    let run = |&(si, pi, p, seed): &(usize, usize, PlannerKind, u64)| (si, pi, run_trial(&scenarios[si], p, seed, cfg));
    let mut results: Vec<(usize, usize, BenchRecord)> = if cfg.parallel <= 1 {
        jobs.iter().map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.parallel)
            .build()
            .expect("thread pool");
        pool.install(|| jobs.par_iter().map(run).collect())
    };
    results.sort_by_key(|(si, pi, r)| (*si, *pi, r.seed));
    results.into_iter().map(|(_, _, r)| r).collect()
}

/// A maximal run of trace entries with the same action count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionsRun {
    /// Time of the first entry in the run.
    pub time_s: f64,
    pub actions: u32,
    pub count: usize,
}

pub fn actions_runs(trace: &[TraceEntry]) -> Vec<ActionsRun> {
    let mut runs: Vec<ActionsRun> = Vec::new();
    for e in trace {
        match runs.last_mut() {
            Some(r) if r.actions == e.cost.actions => r.count += 1,
            _ => runs.push(ActionsRun {
                time_s: e.time_s,
                actions: e.cost.actions,
                count: 1,
            }),
        }
    }
    runs
}

fn format_time(t: f64) -> String {
    format!("{t:.6}")
}

/// `actions@time` per run, `xN` appended for runs of N > 1 entries, `;` separated.
pub fn encode_trace(runs: &[ActionsRun]) -> String {
    let mut out = String::new();
    for (k, r) in runs.iter().enumerate() {
        if k > 0 {
            out.push(';');
        }
        write!(out, "{}@{}", r.actions, format_time(r.time_s)).unwrap();
        if r.count > 1 {
            write!(out, "x{}", r.count).unwrap();
        }
    }
    out
}

pub fn decode_trace(s: &str) -> Option<Vec<ActionsRun>> {
    if s.is_empty() {
        return Some(Vec::new());
    }
    s.split(';')
        .map(|item| {
            let (actions, rest) = item.split_once('@')?;
            let (time, count) = match rest.split_once('x') {
                Some((t, c)) => (t, c.parse().ok()?),
                None => (rest, 1),
            };
            Some(ActionsRun {
                time_s: time.parse().ok()?,
                actions: actions.parse().ok()?,
                count,
            })
        })
        .collect()
}

/// One CSV row, in the form it takes after a write and read round trip.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub scenario: String,
    pub planner: String,
    pub seed: u64,
    pub success: bool,
    pub time_to_first_s: Option<f64>,
    pub cost: Option<CostTriple>,
    pub trace: Vec<ActionsRun>,
}

impl BenchRow {
    /// Action count of the best solution known at time `t`, if any.
    pub fn actions_at(&self, t: f64) -> Option<u32> {
        if !self.success {
            return None;
        }
        self.trace.iter().take_while(|r| r.time_s <= t).last().map(|r| r.actions)
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::BenchCsv {
        line,
        message: e.to_string(),
    }
}

pub fn write_csv(records: &[BenchRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).unwrap();
    for r in records {
        let opt = |v: Option<String>| v.unwrap_or_default();
        w.write_record([
            r.scenario.clone(),
            r.planner.name().to_string(),
            r.seed.to_string(),
            r.success.to_string(),
            opt(r.time_to_first_s.map(format_time)),
            opt(r.cost.map(|c| c.actions.to_string())),
            opt(r.cost.map(|c| c.additive.to_string())),
            opt(r.cost.map(|c| format!("{:.9}", c.dist))),
            encode_trace(&actions_runs(&r.trace)),
        ])
        .unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

pub fn parse_csv(text: &str) -> Result<Vec<BenchRow>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header = rd.headers().map_err(csv_error)?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::BenchCsv {
            line: 1,
            message: format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let bad = |field: &str| Error::BenchCsv {
            line,
            message: format!("bad `{field}` value"),
        };
        let opt_f64 = |i: usize, name: &str| -> Result<Option<f64>> {
            match &rec[i] {
                "" => Ok(None),
                v => v.parse().map(Some).map_err(|_| bad(name)),
            }
        };
        let cost = match (&rec[5], &rec[6]) {
            ("", "") => None,
            (a, ad) => Some(CostTriple::new(
                a.parse().map_err(|_| bad("actions"))?,
                ad.parse().map_err(|_| bad("additive"))?,
                opt_f64(7, "dist")?.ok_or_else(|| bad("dist"))?,
            )),
        };
        rows.push(BenchRow {
            scenario: rec[0].to_string(),
            planner: rec[1].to_string(),
            seed: rec[2].parse().map_err(|_| bad("seed"))?,
            success: rec[3].parse().map_err(|_| bad("success"))?,
            time_to_first_s: opt_f64(4, "time_to_first_s")?,
            cost,
            trace: decode_trace(&rec[8]).ok_or_else(|| bad("trace"))?,
        });
    }
    Ok(rows)
}

/// Median of a non-empty sample; the mean of the middle pair for even sizes.
pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub time_s: f64,
    pub success_rate: f64,
    /// Median action count over the runs solved by this time.
    pub median_actions: Option<f64>,
}

/// `n` log-spaced times from `budget * 1e-4` to `budget`.
pub fn time_grid(budget_s: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let lo = (budget_s * 1e-4).ln();
    let hi = budget_s.ln();
    (0..n)
        .map(|k| {
            if k + 1 == n {
                budget_s
            } else {
                (lo + (hi - lo) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

pub fn curve(rows: &[&BenchRow], grid: &[f64]) -> Vec<CurvePoint> {
    grid.iter()
        .map(|&t| {
            let mut solved: Vec<f64> = rows.iter().filter_map(|r| r.actions_at(t)).map(f64::from).collect();
            CurvePoint {
                time_s: t,
                success_rate: if rows.is_empty() {
                    0.0
                } else {
                    solved.len() as f64 / rows.len() as f64
                },
                median_actions: median(&mut solved),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub scenario: String,
    pub planner: String,
    pub trials: usize,
    pub successes: usize,
    pub median_actions: Option<f64>,
    pub median_time_to_first_s: Option<f64>,
}

/// Per (scenario, planner) final statistics, in first-appearance order.
pub fn summarize(rows: &[BenchRow]) -> Vec<Summary> {
    let mut order: Vec<(String, String)> = Vec::new();
    let mut groups: BTreeMap<(String, String), Vec<&BenchRow>> = BTreeMap::new();
    for r in rows {
        let key = (r.scenario.clone(), r.planner.clone());
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let g = &groups[&key];
            let ok: Vec<&&BenchRow> = g.iter().filter(|r| r.success).collect();
            let mut actions: Vec<f64> = ok.iter().filter_map(|r| r.cost).map(|c| f64::from(c.actions)).collect();
            let mut first: Vec<f64> = ok.iter().filter_map(|r| r.time_to_first_s).collect();
            Summary {
                scenario: key.0,
                planner: key.1,
                trials: g.len(),
                successes: ok.len(),
                median_actions: median(&mut actions),
                median_time_to_first_s: median(&mut first),
            }
        })
        .collect()
}

const COLORS: [&str; 6] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"];

/// Two panels (success rate, median actions) against log time, one line per planner.
pub fn render_svg(scenario: &str, rows: &[BenchRow], budget_s: f64) -> String {
    let grid = time_grid(budget_s, 60);
    let mut planners: Vec<&str> = Vec::new();
    for r in rows.iter().filter(|r| r.scenario == scenario) {
        if !planners.contains(&r.planner.as_str()) {
            planners.push(&r.planner);
        }
    }
    let curves: Vec<(&str, Vec<CurvePoint>)> = planners
        .iter()
        .map(|&p| {
            let group: Vec<&BenchRow> = rows.iter().filter(|r| r.scenario == scenario && r.planner == p).collect();
            (p, curve(&group, &grid))
        })
        .collect();
    let max_actions = curves
        .iter()
        .flat_map(|(_, c)| c.iter().filter_map(|p| p.median_actions))
        .fold(1.0f64, f64::max)
        .ceil();

    let (w, h) = (900.0, 340.0);
    let (pw, ph) = (360.0, 230.0);
    let panels = [(60.0, "success rate", 1.0), (510.0, "median actions", max_actions)];
    let top = 50.0;
    let (t_lo, t_hi) = (grid[0].ln(), budget_s.ln());
    let x_of = |x0: f64, t: f64| x0 + (t.ln() - t_lo) / (t_hi - t_lo) * pw;

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#).unwrap();
    writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="22" font-size="15" text-anchor="middle">{}</text>"#, w / 2.0, xml_escape(scenario)).unwrap();
    for (pi, &(x0, label, y_max)) in panels.iter().enumerate() {
        let y_of = |v: f64| top + ph - v / y_max * ph;
        writeln!(s, r##"<rect x="{x0}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##).unwrap();
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{label}</text>"#, x0 + pw / 2.0, top - 8.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">time [s]</text>"#, x0 + pw / 2.0, top + ph + 32.0).unwrap();
        let mut decade = grid[0].log10().ceil() as i32;
        while 10f64.powi(decade) <= budget_s * (1.0 + 1e-9) {
            let t = 10f64.powi(decade);
            let x = x_of(x0, t);
            writeln!(s, r##"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="#ccc"/>"##, top, top + ph).unwrap();
            writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, top + ph + 15.0, format_tick(t)).unwrap();
            decade += 1;
        }
        let ticks = 4;
        for k in 0..=ticks {
            let v = y_max * k as f64 / ticks as f64;
            let y = y_of(v);
            writeln!(s, r##"<line x1="{x0}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#eee"/>"##, x0 + pw).unwrap();
            writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 5.0, y + 4.0, format_tick(v)).unwrap();
        }
        for (ci, (_, c)) in curves.iter().enumerate() {
            let mut pts = Vec::new();
            let mut prev_y: Option<f64> = None;
            for p in c {
                let v = if pi == 0 { Some(p.success_rate) } else { p.median_actions };
                let Some(v) = v else {
                    prev_y = None;
                    continue;
                };
                let (x, y) = (x_of(x0, p.time_s), y_of(v));
                if let Some(py) = prev_y {
                    pts.push(format!("{x:.2},{py:.2}"));
                } else if !pts.is_empty() {
                    emit_polyline(&mut s, &pts, COLORS[ci % COLORS.len()]);
                    pts.clear();
                }
                pts.push(format!("{x:.2},{y:.2}"));
                prev_y = Some(y);
            }
            emit_polyline(&mut s, &pts, COLORS[ci % COLORS.len()]);
        }
    }
    for (ci, (p, _)) in curves.iter().enumerate() {
        let x = 60.0 + 120.0 * ci as f64;
        let y = h - 18.0;
        let color = COLORS[ci % COLORS.len()];
        writeln!(s, r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"/>"#, x + 20.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, x + 25.0, y + 4.0, xml_escape(p)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn emit_polyline(s: &mut String, pts: &[String], color: &str) {
    if pts.is_empty() {
        return;
    }
    writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
        pts.join(" ")
    )
    .unwrap();
}

fn format_tick(v: f64) -> String {
    if v >= 1.0 || v == 0.0 {
        format!("{}", (v * 100.0).round() / 100.0)
    } else {
        format!("{v:e}")
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[derive(Debug, Clone)]
pub struct BenchOutputs {
    pub csv: PathBuf,
    pub plots: Vec<PathBuf>,
    pub rows: Vec<BenchRow>,
}

/// Writes `bench.csv` and one `<scenario>.svg` per scenario into `out_dir`.
/// The plots are drawn from the CSV as read back from disk.
pub fn write_outputs(out_dir: &Path, records: &[BenchRecord]) -> Result<BenchOutputs> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let csv_path = out_dir.join("bench.csv");
    std::fs::write(&csv_path, write_csv(records)).map_err(|e| Error::io(&csv_path, e))?;
    let text = std::fs::read_to_string(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    let rows = parse_csv(&text)?;

    let mut budgets: Vec<(String, f64)> = Vec::new();
    for r in records {
        match budgets.iter_mut().find(|(s, _)| *s == r.scenario) {
            Some((_, b)) => *b = b.max(r.budget_s),
            None => budgets.push((r.scenario.clone(), r.budget_s)),
        }
    }
    let mut plots = Vec::new();
    for (scenario, budget) in budgets {
        let file = out_dir.join(format!("{scenario}.svg"));
        std::fs::write(&file, render_svg(&scenario, &rows, budget)).map_err(|e| Error::io(&file, e))?;
        plots.push(file);
    }
    Ok(BenchOutputs {
        csv: csv_path,
        plots,
        rows,
    })
}
