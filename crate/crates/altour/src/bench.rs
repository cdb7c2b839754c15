//! Batch runs over a dataset: one results row, one stats row and (optionally)
//! one SVG per experiment.

use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use altour_core::exact::ExactParams;
use altour_core::heuristics::{local_search, LocalSearchParams};
use altour_core::model::Variant;
use altour_core::{Clock, CycleSolution, Error, Instance, Problem};

use crate::dataset::{load_csv, Dataset};
use crate::driver::{solve_exact, WallClock};
use crate::error::{AppError, Result};
use crate::results::{image_dir_name, save_results, save_stats, stats_path, ResultRow, Status, StatsRow};
use crate::svg::render_svg;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Exact,
    Heuristic,
}

impl FromStr for SolverKind {
    type Err = AppError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SolverKind::Exact),
            "heuristic" => Ok(SolverKind::Heuristic),
            other => Err(AppError::Schema(format!("unknown solver {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchParams {
    pub solver: SolverKind,
    pub time_limit: f64,
    /// Experiments solved at the same time.
    pub workers: usize,
    pub seed: u64,
    /// `Generalized` honours type labels; `Simplified` ignores them.
    pub variant: Variant,
}

impl Default for BenchParams {
    fn default() -> Self {
        Self { solver: SolverKind::Exact, time_limit: 300.0, workers: 1, seed: 0, variant: Variant::Simplified }
    }
}

/// The problem an instance poses under `variant`.
pub fn problem_for(instance: &Instance, variant: Variant) -> Problem {
    match variant {
        Variant::Simplified => Problem::from_instance(&instance.clone().without_types()),
        Variant::Generalized => Problem::from_instance(instance),
    }
}

/// Everything one experiment produces.
pub type Outcome = (ResultRow, StatsRow, Option<CycleSolution>);

/// One experiment. Failures become status rows.
pub fn solve_one(instance: &Instance, params: &BenchParams, exact_workers: usize) -> Outcome {
    let id = instance.experiment_id();
    let problem = problem_for(instance, params.variant);
    let clock = WallClock::start();
    let outcome = match params.solver {
        SolverKind::Exact => {
            let ep = ExactParams {
                time_limit: params.time_limit,
                workers: exact_workers,
                seed: params.seed,
                variant: params.variant,
                ..ExactParams::default()
            };
            solve_exact(&problem, &ep)
        }
        SolverKind::Heuristic => {
            let lp = LocalSearchParams { seed: params.seed, time_limit: params.time_limit, ..LocalSearchParams::default() };
            local_search(&problem, &lp, &clock)
        }
    };
    let dt = clock.elapsed_secs();
    let mut stats = StatsRow {
        experiment_id: id,
        n: instance.n(),
        nodes_explored: 0,
        subtours_branched: 0,
        best_bound: f64::NAN,
        gap: f64::NAN,
        timed_out: false,
    };
    match outcome {
        Ok(sol) => {
            let status = match params.solver {
                SolverKind::Exact if sol.stats.timed_out => Status::Timeout,
                SolverKind::Exact => Status::Optimal,
                // a heuristic tour proves nothing
                SolverKind::Heuristic => Status::Timeout,
            };
            stats.nodes_explored = sol.stats.nodes_explored;
            stats.subtours_branched = sol.stats.subtours_branched;
            stats.timed_out = sol.stats.timed_out;
            if params.solver == SolverKind::Exact {
                stats.best_bound = sol.stats.best_bound;
                stats.gap = sol.stats.gap();
            }
            (ResultRow::from_solution(id, &sol, dt, status), stats, Some(sol))
        }
        Err(Error::TimeoutWithoutSolution) => {
            stats.timed_out = true;
            (ResultRow::without_tour(id, dt, Status::Timeout), stats, None)
        }
        Err(_) => (ResultRow::without_tour(id, dt, Status::Infeasible), stats, None),
    }
}

#[derive(Debug, Clone)]
pub struct BenchOutput {
    pub rows: Vec<ResultRow>,
    pub stats: Vec<StatsRow>,
}

/// Solves every experiment, `params.workers` at a time, and writes the
/// results file, its stats sidecar and (with `out_img`) one SVG per tour.
/// Rows come out in experiment order whatever the finishing order.
pub fn run_benchmark(data: &Dataset, params: &BenchParams, out_results: &Path, out_img: Option<&Path>) -> Result<BenchOutput> {
    if !(params.time_limit > 0.0) {
        return Err(AppError::Core(Error::InvalidParameter(format!("time limit {} must be positive", params.time_limit))));
    }
    if let Some(dir) = out_img {
        fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    }
    let instances: Vec<&Instance> = data.values().collect();
    let workers = params.workers.max(1).min(instances.len().max(1));
    // experiments run side by side, or a lone experiment gets every worker
    let exact_workers = if workers == 1 { params.workers.max(1) } else { 1 };
    let slots: Vec<Mutex<Option<Outcome>>> =
        instances.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(inst) = instances.get(k) else { break };
                let out = solve_one(inst, params, exact_workers);
                *slots[k].lock().expect("poisoned") = Some(out);
            });
        }
    });

    let mut rows = Vec::with_capacity(instances.len());
    let mut stats = Vec::with_capacity(instances.len());
    for (inst, slot) in instances.iter().zip(slots) {
        let (row, st, sol) = slot.into_inner().expect("poisoned").expect("every experiment is solved");
        if let (Some(dir), Some(sol)) = (out_img, sol) {
            render_svg(inst, &sol, dir.join(format!("experiment_{}.svg", inst.experiment_id())))?;
        }
        rows.push(row);
        stats.push(st);
    }
    save_results(&rows, out_results)?;
    save_stats(&stats, stats_path(out_results))?;
    Ok(BenchOutput { rows, stats })
}

/// [`run_benchmark`] on a dataset file. An unreadable file fails before any
/// experiment runs. Without `out_img`, plots go to `img_update{n}` next to
/// the results file.
pub fn run_benchmark_file(data_csv: &Path, params: &BenchParams, out_results: &Path, out_img: Option<&Path>) -> Result<BenchOutput> {
    let data = load_csv(data_csv)?;
    let default_dir;
    let img = match out_img {
        Some(d) => Some(d),
        None => {
            let n = data.values().next().map_or(0, Instance::n);
            default_dir = out_results.parent().unwrap_or(Path::new(".")).join(image_dir_name(n));
            Some(default_dir.as_path())
        }
    };
    run_benchmark(&data, params, out_results, img)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::results::load_results;
    use altour_core::instance::generate;
    use altour_core::oracle::brute_force_optimum;

    #[test]
    fn small_batch_matches_oracle() {
        let dir = tempfile::tempdir().unwrap();
        let data = generate(3, 10, 5).unwrap();
        let out = dir.path().join("r.csv");
        let img = dir.path().join("img");
        let params = BenchParams { workers: 3, ..BenchParams::default() };
        let res = run_benchmark(&data, &params, &out, Some(&img)).unwrap();
        assert_eq!(res.rows.len(), 10);
        let back = load_results(&out).unwrap();
        for (row, inst) in back.iter().zip(data.values()) {
            assert_eq!(row.experiment_id, inst.experiment_id());
            assert_eq!(row.status, Status::Optimal);
            let best = brute_force_optimum(&Problem::from_instance(inst)).unwrap().cost;
            assert!((row.best_cost.unwrap() - best).abs() < 1e-4);
            assert!(img.join(format!("experiment_{}.svg", row.experiment_id)).exists());
        }
        assert!(stats_path(&out).exists());
    }

    #[test]
    fn missing_dataset_is_io() {
        let dir = tempfile::tempdir().unwrap();
        let e = run_benchmark_file(&dir.path().join("nope.csv"), &BenchParams::default(), &dir.path().join("r.csv"), None)
            .unwrap_err();
        assert_eq!(e.exit_code(), 4);
        assert!(!dir.path().join("r.csv").exists());
    }
}
