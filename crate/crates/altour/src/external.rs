//! Lazy subtour elimination around a solver without callbacks: export the
//! model, solve it outside, cut every subtour in the answer, repeat.
//!
//! The solver is any command that takes an LP file path and prints one
//! `variable value` pair per line. Lines starting with `#` are ignored.

use std::fs;
use std::path::Path;
use std::process::Command;

use altour_core::model::{
    detect_subtours, to_lp_string, validate_edge_solution, EdgeSolution, ModelSpec, SolutionSource,
};
use altour_core::{CycleSolution, Problem, SolveStats};

use crate::driver::WallClock;
use crate::error::{AppError, Result};
use altour_core::Clock;

const INTEGRAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ExternalOutcome {
    pub solution: CycleSolution,
    /// Solver calls made, the last one included.
    pub rounds: usize,
    /// The model with every cut the loop added.
    pub model: ModelSpec,
}

impl ExternalOutcome {
    pub fn cuts(&self) -> usize {
        self.model.cuts().len()
    }
}

/// Reads `variable value` lines into a model solution. Variables the solver
/// leaves out are 0; values must be within `1e-6` of 0 or 1.
pub fn parse_solution(model: &ModelSpec, text: &str) -> Result<EdgeSolution> {
    let mut pairs: Vec<(&str, u8)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |why: &str| AppError::Protocol(format!("line {}: {why}: {raw:?}", k + 1));
        let mut it = line.split_whitespace();
        let (Some(name), Some(value), None) = (it.next(), it.next(), it.next()) else {
            return Err(bad("expected `variable value`"));
        };
        let v: f64 = value.parse().map_err(|_| bad("value is not a number"))?;
        let bit = if v.abs() <= INTEGRAL_TOL {
            0
        } else if (v - 1.0).abs() <= INTEGRAL_TOL {
            1
        } else {
            return Err(bad("value is not binary"));
        };
        if model.var_index(name).is_none() {
            return Err(bad("unknown variable"));
        }
        pairs.push((name, bit));
    }
    Ok(EdgeSolution::from_named(model, pairs, SolutionSource::External)?)
}

/// Runs `template` through `sh -c`, with `{lp}` replaced by the quoted file
/// path (appended when the template has no `{lp}`), and returns its stdout.
pub fn run_command(template: &str, lp_path: &Path) -> Result<String> {
    let quoted = format!("'{}'", lp_path.display().to_string().replace('\'', r"'\''"));
    let cmd = if template.contains("{lp}") {
        template.replace("{lp}", &quoted)
    } else {
        format!("{template} {quoted}")
    };
    let out = Command::new("sh")
        .arg("-c")
        .arg(&cmd)
        .output()
        .map_err(|e| AppError::External(format!("cannot start {cmd:?}: {e}")))?;
    if !out.status.success() {
        return Err(AppError::External(format!(
            "{cmd:?} exited with {}: {}",
            out.status,
            String::from_utf8_lossy(&out.stderr).trim()
        )));
    }
    String::from_utf8(out.stdout).map_err(|_| AppError::Protocol(String::from("solver output is not UTF-8")))
}

/// The loop with the solver given as a function from LP text to solution
/// text.
pub fn solve_loop_with<F>(mut model: ModelSpec, problem: &Problem, max_rounds: usize, mut solver: F) -> Result<ExternalOutcome>
where
    F: FnMut(&str) -> Result<String>,
{
    let clock = WallClock::start();
    for round in 1..=max_rounds {
        let answer = solver(&to_lp_string(&model))?;
        let sol = parse_solution(&model, &answer)?;
        let sets = detect_subtours(&model, &sol)
            .map_err(|e| AppError::Protocol(format!("round {round}: solution is not a 2-factor: {e}")))?;
        if sets.len() == 1 {
            let report = validate_edge_solution(problem, &model, &sol);
            if !report.passed() {
                return Err(AppError::Protocol(format!("round {round}: {}", report.messages.join("; "))));
            }
            let stats = SolveStats {
                best_bound: report.cost,
                incumbent_cost: report.cost,
                dt: clock.elapsed_secs(),
                binary_var_count: model.variables().len(),
                ..SolveStats::default()
            };
            let solution = CycleSolution::from_edges(problem, &sol.route_edges(&model), stats)?;
            return Ok(ExternalOutcome { solution, rounds: round, model });
        }
        let mut added = 0;
        for s in &sets {
            if model.add_subtour_cut(s)? {
                added += 1;
            }
        }
        if added == 0 {
            return Err(AppError::Protocol(format!("round {round}: solver returned subtours it was already cut from")));
        }
    }
    Err(AppError::NonConvergence { rounds: max_rounds, cuts: model.cuts().len() })
}

/// Exports to `workdir/round_{k}.lp` and runs the command template on it.
pub fn external_solve_loop(
    model: ModelSpec,
    problem: &Problem,
    solver_cmd: &str,
    max_rounds: usize,
    workdir: &Path,
) -> Result<ExternalOutcome> {
    let mut round = 0;
    solve_loop_with(model, problem, max_rounds, |text| {
        round += 1;
        let path = workdir.join(format!("round_{round}.lp"));
        fs::write(&path, text).map_err(|e| AppError::io(&path, e))?;
        run_command(solver_cmd, &path)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpfile::{solve_lp, Method};
    use altour_core::model::build_simplified;
    use altour_core::{Instance, Point};

    fn clusters() -> Problem {
        let items = vec![Point::new(0.0, 0.0), Point::new(0.1, 0.0), Point::new(10.0, 0.0), Point::new(10.1, 0.0)];
        let slots = vec![Point::new(0.0, 0.1), Point::new(0.1, 0.1), Point::new(10.0, 0.1), Point::new(10.1, 0.1)];
        Problem::from_instance(&Instance::new(1, items, slots).unwrap())
    }

    #[test]
    fn protocol_errors_name_the_line() {
        let m = build_simplified(&clusters());
        let e = parse_solution(&m, "# hi\nx_0_4 1\nx_0_5 0.5\n").unwrap_err().to_string();
        assert!(e.contains("line 3") && e.contains("x_0_5 0.5"), "{e}");
        assert!(parse_solution(&m, "y 1\n").is_err());
        assert!(parse_solution(&m, "x_0_4\n").is_err());
        assert_eq!(parse_solution(&m, "x_0_4 1e-9\n").unwrap().values().iter().sum::<u8>(), 0);
    }

    #[test]
    fn clusters_need_a_second_round() {
        let p = clusters();
        let out = solve_loop_with(build_simplified(&p), &p, 10, |t| Ok(solve_lp(t, Method::Generic, 10.0)?.to_text()))
            .unwrap();
        assert!(out.rounds >= 2);
        assert!(out.cuts() >= 2);
        let exact = solve_loop_with(build_simplified(&p), &p, 10, |t| Ok(solve_lp(t, Method::Exact, 10.0)?.to_text()))
            .unwrap();
        assert_eq!(exact.rounds, 1);
        assert!((exact.solution.cost - out.solution.cost).abs() < 1e-9);
    }

    #[test]
    fn zero_rounds() {
        let p = clusters();
        let e = solve_loop_with(build_simplified(&p), &p, 0, |_| unreachable!()).unwrap_err();
        assert!(matches!(e, AppError::NonConvergence { rounds: 0, cuts: 0 }));
    }
}
