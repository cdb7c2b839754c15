use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use altour::bench::{problem_for, run_benchmark, run_benchmark_file, BenchParams, SolverKind};
use altour::dataset::{load_csv, load_types, save_csv, Dataset};
use altour::driver::solve_exact;
use altour::external::external_solve_loop;
use altour::lpfile::{solve_lp, Method};
use altour::report::scaling_report;
use altour::results::{image_dir_name, load_results, save_results, stats_path, ResultRow, Status};
use altour::svg::render_svg;
use altour::{AppError, Result};
use altour_core::exact::ExactParams;
use altour_core::instance::generate;
use altour_core::model::{build_generalized, build_simplified, to_lp_string, validate_solution, ModelSpec, Variant};
use altour_core::{Instance, Problem};

#[derive(Parser)]
#[command(name = "altour", version, about = "Alternating item/placeholder tours: exact and heuristic solving")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Simplified,
    Generalized,
}

impl From<ModelArg> for Variant {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Simplified => Variant::Simplified,
            ModelArg::Generalized => Variant::Generalized,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Exact,
    Heuristic,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Exact,
    Generic,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a random dataset.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one experiment and print the tour.
    Solve {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        experiment: u64,
        #[arg(long, value_enum, default_value = "simplified")]
        model: ModelArg,
        /// Type labels (`Experiment,ID,pType,tType`); used by the generalized model.
        #[arg(long)]
        types: Option<PathBuf>,
        #[arg(long, default_value_t = 300.0)]
        time_limit: f64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write a one-row results file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve every experiment of a dataset.
    Bench {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value = "exact")]
        solver: SolverArg,
        #[arg(long)]
        out_results: PathBuf,
        /// Defaults to `img_update{n}` next to the results file.
        #[arg(long)]
        out_img: Option<PathBuf>,
        #[arg(long, default_value_t = 300.0)]
        time_limit: f64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "simplified")]
        model: ModelArg,
        #[arg(long)]
        types: Option<PathBuf>,
    },
    /// Write the model of one experiment in LP format.
    ExportLp {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        experiment: u64,
        #[arg(long, value_enum, default_value = "simplified")]
        model: ModelArg,
        #[arg(long)]
        types: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve through an outside MIP solver, adding subtour cuts between rounds.
    External {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        experiment: u64,
        /// Command template; `{lp}` is replaced by the LP file path.
        #[arg(long)]
        solver_cmd: String,
        #[arg(long, default_value_t = 50)]
        max_rounds: usize,
        #[arg(long, value_enum, default_value = "simplified")]
        model: ModelArg,
        #[arg(long)]
        types: Option<PathBuf>,
        /// Where the per-round LP files go (default: a fresh temporary directory).
        #[arg(long)]
        workdir: Option<PathBuf>,
    },
    /// Re-score a results file against its dataset.
    Check {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        results: PathBuf,
    },
    /// Plot one experiment's tour from a results file.
    Render {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        experiment: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-size timing summary of results files.
    Report {
        #[arg(long, num_args = 1.., required = true)]
        results: Vec<PathBuf>,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Built-in solver for exported LP files, usable as `--solver-cmd`.
    #[command(hide = true)]
    LpSolve {
        lp: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        method: MethodArg,
        #[arg(long, default_value_t = 300.0)]
        time_limit: f64,
    },
}

fn load_data(data: &Path, types: Option<&Path>) -> Result<Dataset> {
    let mut d = load_csv(data)?;
    if let Some(t) = types {
        load_types(t, &mut d)?;
    }
    Ok(d)
}

fn take(mut d: Dataset, id: u64) -> Result<Instance> {
    d.remove(&id).ok_or(AppError::UnknownExperiment(id))
}

fn build_model(problem: &Problem, variant: Variant) -> Result<ModelSpec> {
    Ok(match variant {
        Variant::Simplified => build_simplified(problem),
        Variant::Generalized => build_generalized(problem, None)?,
    })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| AppError::io(path, e))
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Gen { n, count, seed, out } => {
            let data = generate(n, count, seed)?;
            save_csv(&data, &out)?;
            println!("wrote {count} experiments with n = {n} to {}", out.display());
        }
        Cmd::Solve { data, experiment, model, types, time_limit, workers, seed, out } => {
            let inst = take(load_data(&data, types.as_deref())?, experiment)?;
            let variant = Variant::from(model);
            let problem = problem_for(&inst, variant);
            let params = ExactParams { time_limit, workers, seed, variant, ..ExactParams::default() };
            let sol = solve_exact(&problem, &params)?;
            let s = &sol.stats;
            println!("experiment {experiment}");
            println!("status     {}", if s.timed_out { "timeout" } else { "optimal" });
            println!("best_cost  {:.4}", sol.cost);
            println!("best_bound {:.4}", s.best_bound);
            println!("gap        {:.4}%", 100.0 * s.gap());
            println!("nodes      {}", s.nodes_explored);
            println!("dt         {:.4}", s.dt);
            println!("order      {}", sol.order.iter().map(usize::to_string).collect::<Vec<_>>().join(" "));
            if let Some(out) = out {
                let status = if s.timed_out { Status::Timeout } else { Status::Optimal };
                save_results(&[ResultRow::from_solution(experiment, &sol, s.dt, status)], &out)?;
            }
        }
        Cmd::Bench { data, solver, out_results, out_img, time_limit, workers, seed, model, types } => {
            let solver = match solver {
                SolverArg::Exact => SolverKind::Exact,
                SolverArg::Heuristic => SolverKind::Heuristic,
            };
            let params = BenchParams { solver, time_limit, workers, seed, variant: model.into() };
            let out = match types {
                None => run_benchmark_file(&data, &params, &out_results, out_img.as_deref())?,
                Some(t) => {
                    let d = load_data(&data, Some(&t))?;
                    let n = d.values().next().map_or(0, Instance::n);
                    let img = out_img.unwrap_or_else(|| {
                        out_results.parent().unwrap_or(Path::new(".")).join(image_dir_name(n))
                    });
                    run_benchmark(&d, &params, &out_results, Some(&img))?
                }
            };
            for r in &out.rows {
                let cost = r.best_cost.map_or_else(|| String::from("-"), |c| format!("{c:.4}"));
                println!("{:>8} {:>12} {:>10.4} {}", r.experiment_id, cost, r.dt, r.status);
            }
            println!("wrote {} and {}", out_results.display(), stats_path(&out_results).display());
        }
        Cmd::ExportLp { data, experiment, model, types, out } => {
            let inst = take(load_data(&data, types.as_deref())?, experiment)?;
            let variant = Variant::from(model);
            let m = build_model(&problem_for(&inst, variant), variant)?;
            write_file(&out, &to_lp_string(&m))?;
        }
        Cmd::External { data, experiment, solver_cmd, max_rounds, model, types, workdir } => {
            let inst = take(load_data(&data, types.as_deref())?, experiment)?;
            let variant = Variant::from(model);
            let problem = problem_for(&inst, variant);
            let m = build_model(&problem, variant)?;
            let tmp;
            let dir = match workdir {
                Some(d) => {
                    fs::create_dir_all(&d).map_err(|e| AppError::io(&d, e))?;
                    d
                }
                None => {
                    tmp = std::env::temp_dir().join(format!("altour-external-{}", std::process::id()));
                    fs::create_dir_all(&tmp).map_err(|e| AppError::io(&tmp, e))?;
                    tmp
                }
            };
            let out = external_solve_loop(m, &problem, &solver_cmd, max_rounds, &dir)?;
            println!("experiment {experiment}");
            println!("best_cost  {:.4}", out.solution.cost);
            println!("rounds     {}", out.rounds);
            println!("cuts       {}", out.cuts());
            println!("order      {}", out.solution.order.iter().map(usize::to_string).collect::<Vec<_>>().join(" "));
        }
        Cmd::Check { data, results } => {
            let d = load_csv(&data)?;
            let rows = load_results(&results)?;
            let mut bad = 0;
            for r in &rows {
                let inst = d.get(&r.experiment_id).ok_or(AppError::UnknownExperiment(r.experiment_id))?;
                let Some(cost) = r.best_cost else {
                    println!("{:>8} no tour ({})", r.experiment_id, r.status);
                    continue;
                };
                let verdict = match r.rescore(inst) {
                    Ok(sol) if !validate_solution(&Problem::from_instance(&inst.clone().without_types()), &sol).passed() => {
                        String::from("invalid tour")
                    }
                    Ok(sol) if (sol.cost - cost).abs() > 1e-4 => format!("cost {:.4} != stated {cost:.4}", sol.cost),
                    Ok(_) => String::from("ok"),
                    Err(e) => e.to_string(),
                };
                if verdict != "ok" {
                    bad += 1;
                }
                println!("{:>8} {cost:>12.4} {verdict}", r.experiment_id);
            }
            if bad > 0 {
                return Err(AppError::Check(format!("{bad} of {} rows failed", rows.len())));
            }
        }
        Cmd::Render { data, results, experiment, out } => {
            let inst = take(load_csv(&data)?, experiment)?;
            let rows = load_results(&results)?;
            let row = rows
                .iter()
                .find(|r| r.experiment_id == experiment)
                .ok_or(AppError::UnknownExperiment(experiment))?;
            let sol = row.rescore(&inst)?;
            render_svg(&inst, &sol, &out)?;
        }
        Cmd::Report { results, csv } => {
            let r = scaling_report(&results)?;
            print!("{}", r.to_text());
            if let Some(path) = csv {
                write_file(&path, &r.to_csv())?;
            }
        }
        Cmd::LpSolve { lp, method, time_limit } => {
            let text = fs::read_to_string(&lp).map_err(|e| AppError::io(&lp, e))?;
            let method = match method {
                MethodArg::Auto => Method::Auto,
                MethodArg::Exact => Method::Exact,
                MethodArg::Generic => Method::Generic,
            };
            print!("{}", solve_lp(&text, method, time_limit)?.to_text());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
