//! Reads the LP files written by `altour_core::model::to_lp_string` and
//! solves them.
//!
//! Only the subset of CPLEX LP used by that writer is understood: a
//! `Minimize` objective, linear rows, a `Binaries` section and `End`.
//! Solving rebuilds the model from the parsed text and checks that it
//! reproduces the file row for row, so the built-in solvers never silently
//! answer a different question than the one on disk.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

use altour_core::exact::{self, ExactParams};
use altour_core::model::{
    build_generalized, build_simplified, solve_binary, to_lp_string, EdgeSolution, ModelSpec,
};
use altour_core::{Compat, CostMatrix, Error, Problem};

use crate::driver::WallClock;
use crate::error::{AppError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub name: String,
    pub terms: Vec<(String, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpFile {
    pub objective: Vec<(String, f64)>,
    pub rows: Vec<LpRow>,
    pub binaries: Vec<String>,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Head,
    Objective,
    Rows,
    Binaries,
    End,
}

fn syntax(msg: impl Into<String>) -> AppError {
    AppError::Schema(format!("LP file: {}", msg.into()))
}

fn parse_number(tok: &str) -> Option<f64> {
    let first = tok.chars().next()?;
    if first.is_ascii_digit() || first == '.' || ((first == '-' || first == '+') && tok.len() > 1) {
        tok.parse().ok()
    } else {
        None
    }
}

fn parse_sense(tok: &str) -> Option<RowSense> {
    match tok {
        "<=" | "=<" | "<" => Some(RowSense::Le),
        ">=" | "=>" | ">" => Some(RowSense::Ge),
        "=" => Some(RowSense::Eq),
        _ => None,
    }
}

/// Collects `[sign] [coef] name` terms until a sense token (or the end).
fn parse_terms<'a>(toks: &mut std::iter::Peekable<impl Iterator<Item = &'a str>>) -> Result<Vec<(String, f64)>> {
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    while let Some(&tok) = toks.peek() {
        if parse_sense(tok).is_some() {
            break;
        }
        toks.next();
        match tok {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            _ => {
                if let Some(c) = parse_number(tok) {
                    if coef.is_some() {
                        return Err(syntax(format!("two coefficients in a row before {tok:?}")));
                    }
                    coef = Some(c);
                } else {
                    terms.push((tok.to_string(), sign * coef.take().unwrap_or(1.0)));
                    sign = 1.0;
                }
            }
        }
    }
    if coef.is_some() {
        return Err(syntax("coefficient without a variable"));
    }
    Ok(terms)
}

impl FromStr for LpFile {
    type Err = AppError;

    fn from_str(text: &str) -> Result<Self> {
        let mut section = Section::Head;
        let mut obj_text = String::new();
        let mut row_text = String::new();
        let mut out = LpFile::default();
        for line in text.lines() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('\\') {
                continue;
            }
            let next = match trimmed.to_ascii_lowercase().as_str() {
                "minimize" | "minimise" | "min" => Some(Section::Objective),
                "maximize" | "maximise" | "max" => return Err(syntax("only minimisation is supported")),
                "subject to" | "such that" | "st" | "s.t." => Some(Section::Rows),
                "binaries" | "binary" | "bin" => Some(Section::Binaries),
                "end" => Some(Section::End),
                _ => None,
            };
            if let Some(s) = next {
                section = s;
                continue;
            }
            match section {
                Section::Head => return Err(syntax(format!("text before the objective: {trimmed:?}"))),
                Section::End => return Err(syntax(format!("text after End: {trimmed:?}"))),
                Section::Objective => {
                    obj_text.push(' ');
                    obj_text.push_str(trimmed);
                }
                Section::Rows => {
                    row_text.push(' ');
                    row_text.push_str(trimmed);
                }
                Section::Binaries => out.binaries.extend(trimmed.split_whitespace().map(str::to_string)),
            }
        }
        if section != Section::End {
            return Err(syntax("missing End"));
        }

        let mut toks = obj_text.split_whitespace().peekable();
        if toks.peek().is_some_and(|t| t.ends_with(':')) {
            toks.next();
        }
        out.objective = parse_terms(&mut toks)?;
        if let Some(t) = toks.next() {
            return Err(syntax(format!("unexpected {t:?} in the objective")));
        }

        let mut toks = row_text.split_whitespace().peekable();
        let mut k = 0;
        while let Some(first) = toks.next() {
            k += 1;
            let name = match first.strip_suffix(':') {
                Some(n) if !n.is_empty() => n.to_string(),
                _ => return Err(syntax(format!("row {k} has no name (found {first:?})"))),
            };
            let terms = parse_terms(&mut toks)?;
            let sense = toks.next().and_then(parse_sense).ok_or_else(|| syntax(format!("row {name} has no sense")))?;
            let rhs = toks
                .next()
                .and_then(parse_number)
                .ok_or_else(|| syntax(format!("row {name} has no numeric right-hand side")))?;
            out.rows.push(LpRow { name, terms, sense, rhs });
        }
        Ok(out)
    }
}

fn parse_var(name: &str) -> Option<(char, usize, usize)> {
    let mut parts = name.split('_');
    let kind = parts.next()?;
    let u = parts.next()?.parse().ok()?;
    let v = parts.next()?.parse().ok()?;
    if parts.next().is_some() {
        return None;
    }
    match kind {
        "x" => Some(('x', u, v)),
        "a" => Some(('a', u, v)),
        _ => None,
    }
}

/// A model recovered from an LP file, with the problem it encodes.
#[derive(Debug, Clone)]
pub struct Recovered {
    pub problem: Problem,
    pub model: ModelSpec,
    /// Whether any pair is excluded by a `compat_*` row.
    pub masked: bool,
}

/// Rebuilds the altour model an LP file was exported from.
pub fn recover(lp: &LpFile) -> Result<Recovered> {
    let not_ours = |why: String| AppError::Schema(format!("LP file is not an altour model: {why}"));
    let generalized = lp.binaries.iter().any(|b| b.starts_with("a_"));
    let mut top = 0;
    for b in &lp.binaries {
        let (_, u, v) = parse_var(b).ok_or_else(|| not_ours(format!("unexpected variable {b}")))?;
        top = top.max(u).max(v);
    }
    let n = top.div_ceil(2);
    if n < 2 {
        return Err(not_ours(String::from("fewer than two items")));
    }
    let mut cost = vec![f64::NAN; n * n];
    for (name, c) in &lp.objective {
        let (_, u, v) = parse_var(name).ok_or_else(|| not_ours(format!("objective names {name}")))?;
        let (i, p) = if u < n { (u, v) } else { (v, u) };
        if i >= n || p < n || p >= 2 * n {
            return Err(not_ours(format!("objective names {name}")));
        }
        cost[i * n + (p - n)] = *c;
    }
    if cost.iter().any(|c| c.is_nan()) {
        return Err(not_ours(String::from("objective misses item/placeholder pairs")));
    }
    let fixed_pair = lp.rows.iter().any(|r| r.name == format!("fix_x_{}_{}", n - 1, 2 * n - 1));
    let mut lists: Vec<Vec<usize>> = vec![(0..n).collect(); n];
    let mut masked = false;
    for r in &lp.rows {
        if let Some(rest) = r.name.strip_prefix("compat_") {
            let pair = rest.split_once('_').and_then(|(i, p)| Some((i.parse::<usize>().ok()?, p.parse::<usize>().ok()?)));
            let (i, p) = pair.filter(|(i, p)| *i < n && *p >= n && *p < 2 * n).ok_or_else(|| not_ours(format!("row {}", r.name)))?;
            lists[i].retain(|q| *q != p - n);
            masked = true;
        }
    }
    let cm = CostMatrix::from_rows(n, cost)?;
    let problem = Problem::new(cm, fixed_pair, None)?;
    let mut model = if generalized {
        let compat = if masked { Some(Compat::from_lists(n, &lists)?) } else { None };
        build_generalized(&problem, compat.as_ref())?
    } else {
        build_simplified(&problem)
    };
    for r in lp.rows.iter().filter(|r| r.name.starts_with("sec_")) {
        let mut nodes = BTreeSet::new();
        for (name, _) in &r.terms {
            let (_, u, v) = parse_var(name).ok_or_else(|| not_ours(format!("row {} names {name}", r.name)))?;
            nodes.insert(u);
            nodes.insert(v);
        }
        let nodes: Vec<usize> = nodes.into_iter().collect();
        model.add_subtour_cut(&nodes).map_err(|e| not_ours(format!("row {}: {e}", r.name)))?;
    }
    let again: LpFile = to_lp_string(&model).parse()?;
    if again.binaries != lp.binaries || again.objective != lp.objective {
        return Err(not_ours(String::from("variables or objective differ from the rebuilt model")));
    }
    if again.rows.len() != lp.rows.len() {
        return Err(not_ours(format!("{} rows, the rebuilt model has {}", lp.rows.len(), again.rows.len())));
    }
    if let Some((a, _)) = lp.rows.iter().zip(&again.rows).find(|(a, b)| a != b) {
        return Err(not_ours(format!("row {} differs from the rebuilt model", a.name)));
    }
    Ok(Recovered { problem, model, masked })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Exact tour search when the rows allow it, else enumeration.
    Auto,
    /// Branch and bound over tours. Its answers satisfy every subtour cut, so
    /// an external loop driven by it converges in one round.
    Exact,
    /// Row-by-row 0-1 enumeration; honours only the rows in the file.
    Generic,
}

impl FromStr for Method {
    type Err = AppError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Method::Auto),
            "exact" => Ok(Method::Exact),
            "generic" => Ok(Method::Generic),
            other => Err(AppError::Schema(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub names: Vec<String>,
    pub values: Vec<u8>,
    pub objective: f64,
    pub proven: bool,
}

impl LpSolution {
    /// `# objective ...` followed by one `name value` line per variable.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# objective {}", self.objective);
        if !self.proven {
            s.push_str("# not proven optimal\n");
        }
        for (name, v) in self.names.iter().zip(&self.values) {
            let _ = writeln!(s, "{name} {v}");
        }
        s
    }
}

/// Solves an altour LP file with one of the built-in methods.
pub fn solve_lp(text: &str, method: Method, time_limit: f64) -> Result<LpSolution> {
    let lp: LpFile = text.parse()?;
    let rec = recover(&lp)?;
    let use_exact = match method {
        Method::Exact if rec.masked => {
            return Err(AppError::External(String::from(
                "the exact method cannot honour compat rows; use --method generic",
            )))
        }
        Method::Exact => true,
        Method::Generic => false,
        Method::Auto => !rec.masked,
    };
    let names: Vec<String> = rec.model.variables().iter().map(|v| v.name.clone()).collect();
    if use_exact {
        let params = ExactParams { time_limit, variant: rec.model.variant(), ..ExactParams::default() };
        let sol = exact::solve(&rec.problem, &params, &WallClock::start(), &mut ())?;
        let values = EdgeSolution::from_tour(&rec.model, &sol)?.values().to_vec();
        let objective = rec.model.objective_value(&values);
        return Ok(LpSolution { names, values, objective, proven: !sol.stats.timed_out });
    }
    let out = solve_binary(&rec.model, None);
    match out.values {
        Some(values) => Ok(LpSolution { names, objective: out.cost, values, proven: out.proven }),
        None => Err(AppError::Core(Error::Infeasible)),
    }
}
