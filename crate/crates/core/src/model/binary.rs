//! A small exhaustive 0-1 solver for [`ModelSpec`]s.
//!
//! Depth-first branch and bound with row-activity propagation. It honours
//! exactly the rows it is given, cuts included, and nothing else: a solution
//! may well contain subtours until enough cuts have been added. Intended for
//! the small models used to cross-check formulations and to stand in for an
//! external MIP solver.

use alloc::vec;
use alloc::vec::Vec;

use super::{Constraint, ModelSpec, Sense};

const TOL: f64 = 1e-9;
const UNSET: i8 = -1;

/// Result of [`solve_binary`].
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryOutcome {
    /// Best assignment found, if any.
    pub values: Option<Vec<u8>>,
    pub cost: f64,
    /// `false` when the node limit stopped the search early.
    pub proven: bool,
    pub nodes: u64,
}

/// Minimises the model objective over all 0/1 vectors satisfying every row.
pub fn solve_binary(model: &ModelSpec, node_limit: Option<u64>) -> BinaryOutcome {
    let rows = model.all_rows();
    let mut s = Search::new(model, rows, node_limit);
    if s.initial_propagate() {
        s.dfs();
    }
    BinaryOutcome {
        values: s.best,
        cost: s.best_cost,
        proven: !s.aborted,
        nodes: s.nodes,
    }
}

struct Search {
    nvars: usize,
    obj: Vec<f64>,
    rows: Vec<Constraint>,
    var_rows: Vec<Vec<(usize, f64)>>,
    val: Vec<i8>,
    fixed_act: Vec<f64>,
    pos_free: Vec<f64>,
    neg_free: Vec<f64>,
    fixed_cost: f64,
    /// Variable-disjoint `sum x >= k` style rows with unit coefficients,
    /// each with its variables sorted by objective coefficient.
    cover: Vec<(usize, Vec<usize>)>,
    trail: Vec<usize>,
    best: Option<Vec<u8>>,
    best_cost: f64,
    nodes: u64,
    node_limit: Option<u64>,
    aborted: bool,
}

impl Search {
    fn new(model: &ModelSpec, rows: Vec<Constraint>, node_limit: Option<u64>) -> Self {
        let nvars = model.variables().len();
        let mut obj = vec![0.0; nvars];
        for &(v, c) in model.objective() {
            obj[v] += c;
        }
        let mut var_rows = vec![Vec::new(); nvars];
        let mut pos_free = vec![0.0; rows.len()];
        let mut neg_free = vec![0.0; rows.len()];
        for (r, row) in rows.iter().enumerate() {
            for &(v, c) in &row.terms {
                var_rows[v].push((r, c));
                if c > 0.0 {
                    pos_free[r] += c;
                } else {
                    neg_free[r] += c;
                }
            }
        }
        let mut cover = Vec::new();
        if obj.iter().all(|c| *c >= 0.0) {
            let mut used = vec![false; nvars];
            for (r, row) in rows.iter().enumerate() {
                let unit = row.terms.iter().all(|&(_, c)| c == 1.0);
                let needs = matches!(row.sense, Sense::Eq | Sense::Ge) && row.rhs > 0.0;
                if unit && needs && row.terms.iter().all(|&(v, _)| !used[v]) {
                    let mut vars: Vec<usize> = row.terms.iter().map(|&(v, _)| v).collect();
                    vars.sort_by(|a, b| obj[*a].total_cmp(&obj[*b]).then(a.cmp(b)));
                    for &v in &vars {
                        used[v] = true;
                    }
                    cover.push((r, vars));
                }
            }
        }
        Self {
            nvars,
            obj,
            fixed_act: vec![0.0; rows.len()],
            rows,
            var_rows,
            val: vec![UNSET; nvars],
            pos_free,
            neg_free,
            fixed_cost: 0.0,
            cover,
            trail: Vec::new(),
            best: None,
            best_cost: f64::INFINITY,
            nodes: 0,
            node_limit,
            aborted: false,
        }
    }

    fn assign(&mut self, v: usize, x: i8) {
        self.val[v] = x;
        self.trail.push(v);
        if x == 1 {
            self.fixed_cost += self.obj[v];
        }
        for &(r, c) in &self.var_rows[v] {
            if c > 0.0 {
                self.pos_free[r] -= c;
            } else {
                self.neg_free[r] -= c;
            }
            if x == 1 {
                self.fixed_act[r] += c;
            }
        }
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().expect("non-empty trail");
            let x = self.val[v];
            self.val[v] = UNSET;
            if x == 1 {
                self.fixed_cost -= self.obj[v];
            }
            for &(r, c) in &self.var_rows[v] {
                if c > 0.0 {
                    self.pos_free[r] += c;
                } else {
                    self.neg_free[r] += c;
                }
                if x == 1 {
                    self.fixed_act[r] -= c;
                }
            }
        }
    }

    fn row_ok(&self, r: usize) -> bool {
        let lo = self.fixed_act[r] + self.neg_free[r];
        let hi = self.fixed_act[r] + self.pos_free[r];
        let rhs = self.rows[r].rhs;
        match self.rows[r].sense {
            Sense::Le => lo <= rhs + TOL,
            Sense::Ge => hi >= rhs - TOL,
            Sense::Eq => lo <= rhs + TOL && hi >= rhs - TOL,
        }
    }

    /// Fixes every variable some row forces; `false` on conflict.
    fn propagate(&mut self, mut queue: Vec<usize>) -> bool {
        let mut queued = vec![false; self.rows.len()];
        for &r in &queue {
            queued[r] = true;
        }
        while let Some(r) = queue.pop() {
            queued[r] = false;
            if !self.row_ok(r) {
                return false;
            }
            let lo = self.fixed_act[r] + self.neg_free[r];
            let hi = self.fixed_act[r] + self.pos_free[r];
            let rhs = self.rows[r].rhs;
            let sense = self.rows[r].sense;
            let mut forced: Vec<(usize, i8)> = Vec::new();
            for &(v, c) in &self.rows[r].terms {
                if self.val[v] != UNSET {
                    continue;
                }
                let upper_binding = matches!(sense, Sense::Le | Sense::Eq);
                let lower_binding = matches!(sense, Sense::Ge | Sense::Eq);
                // setting v to 1 raises lo by c (c > 0); setting to 0 lowers hi by c
                if upper_binding {
                    if c > 0.0 && lo + c > rhs + TOL {
                        forced.push((v, 0));
                        continue;
                    }
                    if c < 0.0 && lo - c > rhs + TOL {
                        forced.push((v, 1));
                        continue;
                    }
                }
                if lower_binding {
                    if c > 0.0 && hi - c < rhs - TOL {
                        forced.push((v, 1));
                        continue;
                    }
                    if c < 0.0 && hi + c < rhs - TOL {
                        forced.push((v, 0));
                    }
                }
            }
            for (v, x) in forced {
                if self.val[v] != UNSET {
                    if self.val[v] != x {
                        return false;
                    }
                    continue;
                }
                self.assign(v, x);
                for k in 0..self.var_rows[v].len() {
                    let rr = self.var_rows[v][k].0;
                    if !queued[rr] {
                        queued[rr] = true;
                        queue.push(rr);
                    }
                }
            }
        }
        true
    }

    fn initial_propagate(&mut self) -> bool {
        let all: Vec<usize> = (0..self.rows.len()).rev().collect();
        self.propagate(all)
    }

    fn bound(&self) -> f64 {
        let mut b = self.fixed_cost;
        for (r, vars) in &self.cover {
            let mut need = libm::round(self.rows[*r].rhs - self.fixed_act[*r]) as i64;
            if need <= 0 {
                continue;
            }
            for &v in vars {
                if self.val[v] == UNSET {
                    b += self.obj[v];
                    need -= 1;
                    if need == 0 {
                        break;
                    }
                }
            }
        }
        b
    }

    /// Cheapest free variable of the tightest row that still needs ones.
    fn pick(&self) -> Option<(usize, i8)> {
        let mut best: Option<(usize, usize)> = None;
        for (r, row) in self.rows.iter().enumerate() {
            if !matches!(row.sense, Sense::Eq | Sense::Ge) {
                continue;
            }
            if self.fixed_act[r] >= row.rhs - TOL {
                continue;
            }
            let free = row.terms.iter().filter(|(v, c)| *c > 0.0 && self.val[*v] == UNSET).count();
            if free > 0 && best.is_none_or(|(_, f)| free < f) {
                best = Some((r, free));
            }
        }
        if let Some((r, _)) = best {
            let v = self.rows[r]
                .terms
                .iter()
                .filter(|(v, c)| *c > 0.0 && self.val[*v] == UNSET)
                .map(|(v, _)| *v)
                .min_by(|a, b| self.obj[*a].total_cmp(&self.obj[*b]).then(a.cmp(b)))?;
            return Some((v, 1));
        }
        (0..self.nvars).find(|v| self.val[*v] == UNSET).map(|v| (v, 0))
    }

    fn dfs(&mut self) {
        if self.aborted {
            return;
        }
        self.nodes += 1;
        if self.node_limit.is_some_and(|l| self.nodes > l) {
            self.aborted = true;
            return;
        }
        if self.bound() >= self.best_cost - TOL {
            return;
        }
        let Some((v, first)) = self.pick() else {
            if (0..self.rows.len()).all(|r| self.row_ok(r)) {
                self.best_cost = self.fixed_cost;
                self.best = Some(self.val.iter().map(|x| *x as u8).collect());
            }
            return;
        };
        for x in [first, 1 - first] {
            let mark = self.trail.len();
            self.assign(v, x);
            let rows: Vec<usize> = self.var_rows[v].iter().map(|(r, _)| *r).collect();
            if self.propagate(rows) {
                self.dfs();
            }
            self.undo_to(mark);
            if self.aborted {
                return;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_simplified, detect_subtours, EdgeSolution, SolutionSource};
    use crate::problem::Problem;

    #[test]
    fn k22_has_a_single_solution() {
        let inst = crate::instance::generate(2, 1, 1).unwrap().remove(&1000).unwrap();
        let p = Problem::from_instance(&inst);
        let m = build_simplified(&p);
        let out = solve_binary(&m, None);
        assert!(out.proven);
        assert_eq!(out.values.as_deref(), Some(&[1u8, 1, 1, 1][..]));
        let total: f64 = (0..2).flat_map(|i| (0..2).map(move |q| (i, q))).map(|(i, q)| p.cost().get(i, q)).sum();
        assert!((out.cost - total).abs() < 1e-12);
    }

    #[test]
    fn honours_only_given_rows() {
        // two far-apart clusters: the unconstrained optimum is two 4-cycles
        use crate::instance::{Instance, Point};
        let items = vec![Point::new(0.0, 0.0), Point::new(0.1, 0.0), Point::new(10.0, 0.0), Point::new(10.1, 0.0)];
        let slots = vec![Point::new(0.0, 0.1), Point::new(0.1, 0.1), Point::new(10.0, 0.1), Point::new(10.1, 0.1)];
        let inst = Instance::new(1, items, slots).unwrap();
        let p = Problem::from_instance(&inst);
        let mut m = build_simplified(&p);
        let out = solve_binary(&m, None);
        let sol = EdgeSolution::from_values(&m, out.values.unwrap(), SolutionSource::Internal).unwrap();
        let sets = detect_subtours(&m, &sol).unwrap();
        assert_eq!(sets.len(), 2);
        for s in &sets {
            m.add_subtour_cut(s).unwrap();
        }
        let out = solve_binary(&m, None);
        let sol = EdgeSolution::from_values(&m, out.values.unwrap(), SolutionSource::Internal).unwrap();
        assert_eq!(detect_subtours(&m, &sol).unwrap().len(), 1);
    }
}
