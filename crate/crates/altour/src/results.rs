//! Results CSV: `experiment_id,best_cost,dt,assignment,edges,status`.
//!
//! `assignment` lists `item:placeholder` pairs and `edges` the directed tour
//! legs `from-to`, both with global node ids and joined by `;`. Costs and
//! times are written with four decimals. A sidecar `*_stats.csv` keeps the
//! search counters that the main file has no column for.

use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use altour_core::{CycleSolution, Instance, Problem};

use crate::error::{AppError, Result};

pub const HEADER: [&str; 6] = ["experiment_id", "best_cost", "dt", "assignment", "edges", "status"];
pub const STATS_HEADER: [&str; 7] =
    ["experiment_id", "n", "nodes_explored", "subtours_branched", "best_bound", "gap", "timed_out"];

/// `updated_experiment_n_{n}_results.csv`
pub fn results_file_name(n: usize) -> String {
    format!("updated_experiment_n_{n}_results.csv")
}

/// `img_update{n}`
pub fn image_dir_name(n: usize) -> String {
    format!("img_update{n}")
}

/// Sidecar path: `foo.csv` becomes `foo_stats.csv`.
pub fn stats_path(results: &Path) -> PathBuf {
    let stem = results.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    results.with_file_name(format!("{stem}_stats.csv"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Timeout,
    Infeasible,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Timeout => "timeout",
            Status::Infeasible => "infeasible",
        })
    }
}

impl FromStr for Status {
    type Err = AppError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimal" => Ok(Status::Optimal),
            "timeout" => Ok(Status::Timeout),
            "infeasible" => Ok(Status::Infeasible),
            other => Err(AppError::Schema(format!("unknown status {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment_id: u64,
    /// Absent when no tour was found.
    pub best_cost: Option<f64>,
    pub dt: f64,
    pub assignment: Vec<(usize, usize)>,
    pub edges: Vec<(usize, usize)>,
    pub status: Status,
}

impl ResultRow {
    pub fn from_solution(experiment_id: u64, sol: &CycleSolution, dt: f64, status: Status) -> Self {
        Self {
            experiment_id,
            best_cost: Some(sol.cost),
            dt,
            assignment: sol.assignment.iter().enumerate().map(|(i, p)| (i, *p)).collect(),
            edges: sol.directed_edges(),
            status,
        }
    }

    pub fn without_tour(experiment_id: u64, dt: f64, status: Status) -> Self {
        Self { experiment_id, best_cost: None, dt, assignment: Vec::new(), edges: Vec::new(), status }
    }

    /// Rebuilds the tour from `edges` and re-scores it on `instance`.
    pub fn rescore(&self, instance: &Instance) -> Result<CycleSolution> {
        let n = instance.n();
        if self.edges.len() != 2 * n {
            return Err(AppError::Schema(format!(
                "experiment {}: {} edges for n = {n}",
                self.experiment_id,
                self.edges.len()
            )));
        }
        let mut order = Vec::with_capacity(2 * n);
        let mut cur = self.edges[0].0;
        for _ in 0..2 * n {
            order.push(cur);
            let next = self.edges.iter().find(|(u, _)| *u == cur).map(|(_, v)| *v);
            cur = next.ok_or_else(|| {
                AppError::Schema(format!("experiment {}: node {cur} has no outgoing edge", self.experiment_id))
            })?;
        }
        if cur != order[0] {
            return Err(AppError::Schema(format!("experiment {}: edges do not close a tour", self.experiment_id)));
        }
        let problem = Problem::from_instance(instance);
        Ok(CycleSolution::from_order(&problem, order, Default::default())?)
    }
}

fn join_pairs(pairs: &[(usize, usize)], sep: char) -> String {
    pairs.iter().map(|(a, b)| format!("{a}{sep}{b}")).collect::<Vec<_>>().join(";")
}

fn parse_pairs(raw: &str, sep: char, row: u64, field: &'static str) -> Result<Vec<(usize, usize)>> {
    if raw.trim().is_empty() {
        return Ok(Vec::new());
    }
    raw.split(';')
        .map(|tok| {
            let bad = || AppError::Parse { row, field, value: tok.to_string() };
            let (a, b) = tok.trim().split_once(sep).ok_or_else(bad)?;
            Ok((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?))
        })
        .collect()
}

pub fn write_results(rows: &[ResultRow], writer: impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.experiment_id.to_string(),
            r.best_cost.map(|c| format!("{c:.4}")).unwrap_or_default(),
            format!("{:.4}", r.dt),
            join_pairs(&r.assignment, ':'),
            join_pairs(&r.edges, '-'),
            r.status.to_string(),
        ])?;
    }
    w.flush().map_err(|e| AppError::Csv(e.into()))?;
    Ok(())
}

pub fn save_results(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| AppError::io(path, e))?;
    write_results(rows, file)
}

/// Parses a results file; an empty file or a different header is a schema
/// error.
pub fn read_results(reader: impl Read) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.is_empty() || header.iter().all(str::is_empty) {
        return Err(AppError::Schema("empty results file".into()));
    }
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(AppError::Schema(format!(
            "expected header {:?}, found {:?}",
            HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec.position().map_or(0, |p| p.line());
        let get = |k: usize| rec.get(k).unwrap_or("");
        let parse_f = |k: usize, field: &'static str| -> Result<f64> {
            get(k).parse().map_err(|_| AppError::Parse { row, field, value: get(k).to_string() })
        };
        rows.push(ResultRow {
            experiment_id: get(0)
                .parse()
                .map_err(|_| AppError::Parse { row, field: "experiment_id", value: get(0).to_string() })?,
            best_cost: if get(1).is_empty() { None } else { Some(parse_f(1, "best_cost")?) },
            dt: parse_f(2, "dt")?,
            assignment: parse_pairs(get(3), ':', row, "assignment")?,
            edges: parse_pairs(get(4), '-', row, "edges")?,
            status: get(5).parse()?,
        });
    }
    Ok(rows)
}

pub fn load_results(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| AppError::io(path, e))?;
    read_results(file)
}

/// Search counters for one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsRow {
    pub experiment_id: u64,
    pub n: usize,
    pub nodes_explored: u64,
    pub subtours_branched: u64,
    pub best_bound: f64,
    pub gap: f64,
    pub timed_out: bool,
}

pub fn save_stats(rows: &[StatsRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| AppError::io(path, e))?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file);
    w.write_record(STATS_HEADER)?;
    for r in rows {
        w.write_record([
            r.experiment_id.to_string(),
            r.n.to_string(),
            r.nodes_explored.to_string(),
            r.subtours_branched.to_string(),
            format!("{:.6}", r.best_bound),
            format!("{:.6}", r.gap),
            r.timed_out.to_string(),
        ])?;
    }
    w.flush().map_err(|e| AppError::io(path, e))?;
    Ok(())
}

pub fn load_stats(path: impl AsRef<Path>) -> Result<Vec<StatsRow>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| AppError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    if rdr.headers()?.iter().ne(STATS_HEADER.iter().copied()) {
        return Err(AppError::Schema(format!("{}: unexpected stats header", path.display())));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec.position().map_or(0, |p| p.line());
        let get = |k: usize| rec.get(k).unwrap_or("");
        fn p<T: FromStr>(s: &str, row: u64, field: &'static str) -> Result<T> {
            s.parse().map_err(|_| AppError::Parse { row, field, value: s.to_string() })
        }
        out.push(StatsRow {
            experiment_id: p(get(0), row, "experiment_id")?,
            n: p(get(1), row, "n")?,
            nodes_explored: p(get(2), row, "nodes_explored")?,
            subtours_branched: p(get(3), row, "subtours_branched")?,
            best_bound: p(get(4), row, "best_bound")?,
            gap: p(get(5), row, "gap")?,
            timed_out: p(get(6), row, "timed_out")?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use altour_core::Point;

    fn square() -> Instance {
        Instance::new(
            5,
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)],
            vec![Point::new(0.0, 1.0), Point::new(1.0, 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn row_round_trip_and_rescore() {
        let inst = square();
        let p = Problem::from_instance(&inst);
        let sol = CycleSolution::from_order(&p, vec![3, 0, 2, 1], Default::default()).unwrap();
        let rows = vec![
            ResultRow::from_solution(5, &sol, 0.01234, Status::Optimal),
            ResultRow::without_tour(6, 1.0, Status::Infeasible),
        ];
        let mut buf = Vec::new();
        write_results(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "5,4.8284,0.0123,0:2;1:3,3-0;0-2;2-1;1-3,optimal"
        );
        assert_eq!(text.lines().nth(2).unwrap(), "6,,1.0000,,,infeasible");
        let back = read_results(&buf[..]).unwrap();
        assert_eq!(back[0].edges, rows[0].edges);
        let re = back[0].rescore(&inst).unwrap();
        assert!((re.cost - back[0].best_cost.unwrap()).abs() < 1e-4);
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(read_results(&b""[..]), Err(AppError::Schema(_))));
        assert!(matches!(read_results(&b"experiment_id,best_cost\n1,2\n"[..]), Err(AppError::Schema(_))));
    }
}
