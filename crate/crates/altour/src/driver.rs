//! Exact solving against the wall clock, optionally on several threads.

use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::Instant;

use altour_core::exact::{self, expand, root_node, ExactParams, Expansion, Frontier};
use altour_core::{Clock, CycleSolution, Error, Problem, SolveStats, COST_EPS};

/// Seconds since construction.
#[derive(Debug, Clone, Copy)]
pub struct WallClock(Instant);

impl WallClock {
    pub fn start() -> Self {
        Self(Instant::now())
    }
}

impl Clock for WallClock {
    fn elapsed_secs(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

const TIGHTEN_BUDGET: usize = 10_000;

/// Solves to optimality or until `params.time_limit` seconds have passed.
///
/// One worker runs the deterministic sequential search. More workers share
/// one frontier and one incumbent; their results are optimal all the same but
/// node counts vary from run to run.
pub fn solve_exact(problem: &Problem, params: &ExactParams) -> altour_core::Result<CycleSolution> {
    let clock = WallClock::start();
    if params.workers <= 1 {
        return exact::solve(problem, params, &clock, &mut ());
    }
    solve_parallel(problem, params, &clock)
}

struct Shared {
    frontier: Frontier,
    best: Option<(Vec<usize>, f64)>,
    stats: SolveStats,
    busy: usize,
    done: bool,
}

impl Shared {
    fn incumbent(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |b| b.1)
    }
}

fn solve_parallel(problem: &Problem, params: &ExactParams, clock: &WallClock) -> altour_core::Result<CycleSolution> {
    params.validate()?;
    problem.check_feasible()?;
    let mut stats = SolveStats { binary_var_count: params.binary_var_count(problem.n()), ..SolveStats::default() };
    let best = exact::initial_incumbent(problem, params, clock).map(|s| (s.order, s.cost));
    let root = root_node(problem)?;
    stats.best_bound = root.bound();
    let mut frontier = Frontier::new(params.frontier_cap);
    frontier.push_all(vec![root]);

    let shared = Mutex::new(Shared { frontier, best, stats, busy: 0, done: false });
    let wake = Condvar::new();
    thread::scope(|s| {
        for _ in 0..params.workers {
            s.spawn(|| worker(problem, params, clock, &shared, &wake));
        }
    });

    let mut sh = shared.into_inner().expect("worker panicked");
    if sh.stats.timed_out {
        let inc = sh.incumbent();
        sh.frontier.tighten(problem, inc, TIGHTEN_BUDGET);
        sh.stats.best_bound = sh.frontier.min_bound().min(inc).max(sh.stats.best_bound);
    }
    let (order, cost) = match sh.best {
        Some(b) => b,
        None if sh.stats.timed_out => return Err(Error::TimeoutWithoutSolution),
        None => return Err(Error::Infeasible),
    };
    let mut stats = sh.stats;
    stats.incumbent_cost = cost;
    if !stats.timed_out {
        stats.best_bound = cost;
    }
    stats.dt = clock.elapsed_secs();
    CycleSolution::from_order(problem, order, stats)
}

fn worker(problem: &Problem, params: &ExactParams, clock: &WallClock, shared: &Mutex<Shared>, wake: &Condvar) {
    let mut sh = shared.lock().expect("poisoned");
    loop {
        if sh.done {
            return;
        }
        let out_of_time = clock.elapsed_secs() >= params.time_limit
            || params.node_limit.is_some_and(|l| sh.stats.nodes_explored >= l);
        if out_of_time {
            sh.stats.timed_out = true;
            sh.done = true;
            wake.notify_all();
            return;
        }
        let Some(node) = sh.frontier.pop() else {
            if sh.busy == 0 {
                sh.done = true;
                wake.notify_all();
                return;
            }
            sh = wake.wait(sh).expect("poisoned");
            continue;
        };
        let inc = sh.incumbent();
        if node.bound() >= inc - COST_EPS {
            continue;
        }
        let threshold = sh.frontier.requeue_threshold();
        sh.busy += 1;
        drop(sh);
        let out = expand(problem, node, inc, threshold, &mut ());
        sh = shared.lock().expect("poisoned");
        sh.busy -= 1;
        match out {
            Expansion::Pruned => {}
            Expansion::Requeue(node) => sh.frontier.requeue(node),
            Expansion::Tour { order, cost } => {
                sh.stats.nodes_explored += 1;
                if cost < sh.incumbent() {
                    sh.best = Some((order, cost));
                }
            }
            Expansion::Branched(children) => {
                sh.stats.nodes_explored += 1;
                sh.stats.subtours_branched += 1;
                sh.frontier.push_all(children);
            }
        }
        wake.notify_all();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use altour_core::instance::generate;
    use altour_core::oracle::brute_force_optimum;

    #[test]
    fn parallel_matches_oracle() {
        for (id, inst) in generate(5, 6, 11).unwrap() {
            let p = Problem::from_instance(&inst);
            let params = ExactParams { workers: 3, heuristic_restarts: 0, ..ExactParams::default() };
            let a = solve_exact(&p, &params).unwrap();
            let b = brute_force_optimum(&p).unwrap();
            assert!((a.cost - b.cost).abs() < 1e-9, "experiment {id}");
            assert!(!a.stats.timed_out);
        }
    }

    #[test]
    fn parallel_node_limit() {
        let inst = generate(12, 1, 3).unwrap().remove(&1000).unwrap();
        let p = Problem::from_instance(&inst);
        let params = ExactParams { workers: 2, node_limit: Some(1), ..ExactParams::default() };
        let a = solve_exact(&p, &params).unwrap();
        assert!(a.stats.best_bound <= a.cost + 1e-9);
    }
}
