//! Per-size summaries of results files: mean, median and max of solve time
//! and, where a stats sidecar exists, of explored nodes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{AppError, Result};
use crate::results::{load_results, load_stats, stats_path, Status};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let k = v.len();
        let median = if k % 2 == 1 { v[k / 2] } else { (v[k / 2 - 1] + v[k / 2]) / 2.0 };
        Some(Self { mean: v.iter().sum::<f64>() / k as f64, median, max: v[k - 1] })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub n: usize,
    pub experiments: usize,
    pub optimal: usize,
    pub dt: Summary,
    /// Absent when no file for this size has a stats sidecar.
    pub nodes: Option<Summary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub rows: Vec<ReportRow>,
}

pub const CSV_HEADER: &str = "n,experiments,optimal,dt_mean,dt_median,dt_max,nodes_mean,nodes_median,nodes_max";

/// `n` from an `..._n_{n}_...` file name.
fn n_from_name(path: &Path) -> Option<usize> {
    let name = path.file_name()?.to_str()?;
    let rest = &name[name.find("_n_")? + 3..];
    let digits: String = rest.chars().take_while(char::is_ascii_digit).collect();
    digits.parse().ok()
}

pub fn scaling_report(results_paths: &[PathBuf]) -> Result<ScalingReport> {
    if results_paths.is_empty() {
        return Err(AppError::Schema(String::from("no results files given")));
    }
    let mut dts: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut nodes: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut optimal: BTreeMap<usize, usize> = BTreeMap::new();
    for path in results_paths {
        let rows = load_results(path)?;
        let sidecar = stats_path(path);
        let stats = if sidecar.exists() { Some(load_stats(&sidecar)?) } else { None };
        let from_rows = rows.iter().find(|r| !r.edges.is_empty()).map(|r| r.edges.len() / 2);
        let from_stats = stats.as_ref().and_then(|s| s.first()).map(|s| s.n);
        let n = n_from_name(path).or(from_stats).or(from_rows).ok_or_else(|| {
            AppError::Schema(format!("{}: cannot tell the instance size", path.display()))
        })?;
        for r in &rows {
            dts.entry(n).or_default().push(r.dt);
            *optimal.entry(n).or_default() += usize::from(r.status == Status::Optimal);
        }
        if let Some(stats) = stats {
            nodes.entry(n).or_default().extend(stats.iter().map(|s| s.nodes_explored as f64));
        }
    }
    let rows = dts
        .into_iter()
        .filter_map(|(n, dt)| {
            Some(ReportRow {
                n,
                experiments: dt.len(),
                optimal: optimal.get(&n).copied().unwrap_or(0),
                dt: Summary::of(&dt)?,
                nodes: nodes.get(&n).and_then(|v| Summary::of(v)),
            })
        })
        .collect();
    Ok(ScalingReport { rows })
}

impl ScalingReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:>6} {:>6} {:>8} {:>10} {:>10} {:>10} {:>12} {:>12} {:>12}",
            "n", "runs", "optimal", "dt mean", "dt median", "dt max", "nodes mean", "nodes median", "nodes max"
        );
        for r in &self.rows {
            let _ = write!(
                s,
                "{:>6} {:>6} {:>8} {:>10.4} {:>10.4} {:>10.4}",
                r.n, r.experiments, r.optimal, r.dt.mean, r.dt.median, r.dt.max
            );
            match r.nodes {
                Some(k) => {
                    let _ = writeln!(s, " {:>12.1} {:>12.1} {:>12.0}", k.mean, k.median, k.max);
                }
                None => {
                    let _ = writeln!(s, " {:>12} {:>12} {:>12}", "-", "-", "-");
                }
            }
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = write!(s, "{},{},{},{:.4},{:.4},{:.4}", r.n, r.experiments, r.optimal, r.dt.mean, r.dt.median, r.dt.max);
            match r.nodes {
                Some(k) => {
                    let _ = writeln!(s, ",{:.1},{:.1},{:.0}", k.mean, k.median, k.max);
                }
                None => s.push_str(",,,\n"),
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::results::{save_results, ResultRow};
    use std::fs;

    fn row(id: u64, dt: f64) -> ResultRow {
        ResultRow::without_tour(id, dt, Status::Optimal)
    }

    #[test]
    fn single_row_mean() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("updated_experiment_n_7_results.csv");
        save_results(&[row(1, 0.25)], &p).unwrap();
        let r = scaling_report(&[p]).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].n, 7);
        assert_eq!(r.rows[0].dt.mean, 0.25);
        assert!(r.rows[0].nodes.is_none());
        assert!(r.to_csv().starts_with(CSV_HEADER));
    }

    #[test]
    fn median_and_grouping() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("updated_experiment_n_4_results.csv");
        let b = dir.path().join("more_n_4_runs.csv");
        save_results(&[row(1, 1.0), row(2, 3.0)], &a).unwrap();
        save_results(&[row(3, 8.0)], &b).unwrap();
        let r = scaling_report(&[a, b]).unwrap();
        assert_eq!(r.rows[0].experiments, 3);
        assert_eq!(r.rows[0].dt, Summary { mean: 4.0, median: 3.0, max: 8.0 });
    }

    #[test]
    fn schema_errors() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("x_n_3_.csv");
        fs::write(&empty, "").unwrap();
        assert!(matches!(scaling_report(&[empty]), Err(AppError::Schema(_))));
        let other = dir.path().join("y_n_3_.csv");
        fs::write(&other, "Experiment,ID,pX,pY,tX,tY\n").unwrap();
        assert!(matches!(scaling_report(&[other]), Err(AppError::Schema(_))));
    }
}
