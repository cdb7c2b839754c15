use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{EdgeSolution, ModelSpec};
use crate::problem::{Edge, Problem};
use crate::tour::{cycles_of, derive_assignment, orient_tour, CycleSolution};
use crate::COST_EPS;

/// Per-constraint verdicts for a candidate solution. Never fails; every
/// problem found is recorded in `messages`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// Only item–placeholder edges, in range, none repeated.
    pub valid_edges: bool,
    pub degree_two: bool,
    /// The start/goal edge is present (vacuously true without the fixed pair).
    pub fixed_pair: bool,
    pub connected: bool,
    /// The directed order alternates sides and visits every node once.
    pub alternation: bool,
    pub types_respected: bool,
    /// Every model row, cuts included, holds (only checked for model solutions).
    pub rows_satisfied: bool,
    pub cost: f64,
    /// The claimed cost matches the recomputed one within `1e-9`.
    pub cost_consistent: bool,
    pub messages: Vec<String>,
}

impl ValidationReport {
    fn new() -> Self {
        Self {
            valid_edges: true,
            degree_two: true,
            fixed_pair: true,
            connected: true,
            alternation: true,
            types_respected: true,
            rows_satisfied: true,
            cost: 0.0,
            cost_consistent: true,
            messages: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.valid_edges
            && self.degree_two
            && self.fixed_pair
            && self.connected
            && self.alternation
            && self.types_respected
            && self.rows_satisfied
            && self.cost_consistent
    }

    fn fail(&mut self, msg: String) {
        self.messages.push(msg);
    }
}

/// Checks an undirected edge set against the tour constraints.
pub fn validate_edges(problem: &Problem, edges: &[Edge]) -> ValidationReport {
    let mut r = ValidationReport::new();
    check_edges(problem, edges, &mut r);
    r
}

fn check_edges(problem: &Problem, edges: &[Edge], r: &mut ValidationReport) {
    let n = problem.n();
    let mut in_range: Vec<Edge> = Vec::with_capacity(edges.len());
    for e in edges {
        if e.item >= n || e.slot >= n {
            r.valid_edges = false;
            r.fail(format!("edge ({}, {}) out of range", e.item, e.slot));
        } else {
            in_range.push(*e);
        }
    }
    let mut sorted = in_range.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        r.valid_edges = false;
        r.fail(String::from("repeated edge"));
    }
    if edges.len() != 2 * n {
        r.valid_edges = false;
        r.fail(format!("{} edges, expected {}", edges.len(), 2 * n));
    }
    let mut deg = vec![0usize; 2 * n];
    for e in &in_range {
        let (u, v) = e.nodes(n);
        deg[u] += 1;
        deg[v] += 1;
    }
    if let Some((node, d)) = deg.iter().enumerate().find(|(_, d)| **d != 2) {
        r.degree_two = false;
        r.fail(format!("node {node} has degree {d}"));
    }
    if let Some(locked) = problem.locked_edge() {
        if !in_range.contains(&locked) {
            r.fixed_pair = false;
            r.fail(format!("fixed pair edge {{{}, {}}} missing", n - 1, 2 * n - 1));
        }
    }
    r.cost = problem.edge_cost(&in_range);
    if r.degree_two && r.valid_edges {
        match cycles_of(n, &in_range) {
            Ok(c) if c.len() == 1 => {}
            Ok(c) => {
                r.connected = false;
                r.fail(format!("{} disjoint cycles", c.len()));
            }
            Err(e) => {
                r.connected = false;
                r.fail(format!("{e}"));
            }
        }
    } else {
        r.connected = false;
    }
    if r.connected && r.fixed_pair && problem.compat().is_some() {
        match orient_tour(problem, &in_range) {
            Ok(order) if problem.respects_types(&order) => {}
            _ => {
                r.types_respected = false;
                r.fail(String::from("no orientation delivers every item to a compatible placeholder"));
            }
        }
    }
}

/// Full check of a directed tour, including its derived fields.
pub fn validate_solution(problem: &Problem, sol: &CycleSolution) -> ValidationReport {
    let n = problem.n();
    let mut r = ValidationReport::new();
    let order = &sol.order;
    let mut seen = vec![false; 2 * n];
    let mut alternates = order.len() == 2 * n && order.first().is_some_and(|v| *v >= n);
    for (k, &u) in order.iter().enumerate() {
        if u >= 2 * n || seen[u] {
            alternates = false;
            break;
        }
        seen[u] = true;
        let v = order[(k + 1) % order.len()];
        if (u < n) == (v < n) {
            alternates = false;
        }
    }
    if !alternates {
        r.alternation = false;
        r.valid_edges = false;
        r.degree_two = false;
        r.connected = false;
        r.fixed_pair = problem.locked_edge().is_none();
        r.cost_consistent = false;
        r.fail(String::from("order is not an alternating permutation of all nodes"));
        return r;
    }
    let mut edges: Vec<Edge> = (0..order.len())
        .filter_map(|k| Edge::from_nodes(n, order[k], order[(k + 1) % order.len()]))
        .collect();
    check_edges(problem, &edges, &mut r);
    if problem.fixed_pair() && (order[0] != 2 * n - 1 || order[order.len() - 1] != n - 1) {
        r.fixed_pair = false;
        r.fail(String::from("tour does not run from placeholder 2n-1 and end at item n-1"));
    }
    if !problem.respects_types(order) {
        r.types_respected = false;
        r.fail(String::from("a delivery leg is incompatible"));
    }
    edges.sort_unstable();
    if edges != sol.edges {
        r.valid_edges = false;
        r.fail(String::from("stored edges differ from the order"));
    }
    if derive_assignment(n, order).ok().as_deref() != Some(&sol.assignment[..]) {
        r.alternation = false;
        r.fail(String::from("stored assignment differs from the order"));
    }
    r.cost = problem.tour_cost(order);
    if (r.cost - sol.cost).abs() > COST_EPS {
        r.cost_consistent = false;
        r.fail(format!("claimed cost {} but tour costs {}", sol.cost, r.cost));
    }
    r
}

/// Checks a model-level solution: every row (cuts included) plus the tour
/// constraints on its route arcs.
pub fn validate_edge_solution(problem: &Problem, model: &ModelSpec, sol: &EdgeSolution) -> ValidationReport {
    let mut r = ValidationReport::new();
    for row in model.all_rows() {
        let lhs = row.activity(sol.values());
        if !row.sense.holds(lhs, row.rhs) {
            r.rows_satisfied = false;
            r.fail(format!("row {} violated: {lhs} {} {}", row.name, row.sense.symbol(), row.rhs));
        }
    }
    let edges = sol.route_edges(model);
    check_edges(problem, &edges, &mut r);
    r.cost = model.objective_value(sol.values());
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::CostMatrix;
    use crate::tour::SolveStats;

    fn flat(n: usize, fixed: bool) -> Problem {
        Problem::new(CostMatrix::from_rows(n, vec![1.0; n * n]).unwrap(), fixed, None).unwrap()
    }

    fn two_squares() -> Vec<Edge> {
        let mut v = Vec::new();
        for (a, b) in [(0, 1), (2, 3)] {
            for i in [a, b] {
                for p in [a, b] {
                    v.push(Edge::new(i, p));
                }
            }
        }
        v
    }

    #[test]
    fn disjoint_cycles_fail_only_connectivity() {
        let r = validate_edges(&flat(4, true), &two_squares());
        assert!(r.valid_edges && r.degree_two && r.fixed_pair);
        assert!(!r.connected);
        assert!(!r.passed());
    }

    #[test]
    fn missing_fixed_pair_edge() {
        // item 3 sits between placeholders 4 and 5, so {3, 7} is absent
        let order = [4, 3, 5, 0, 6, 1, 7, 2];
        let edges: Vec<Edge> = (0..8).map(|k| Edge::from_nodes(4, order[k], order[(k + 1) % 8]).unwrap()).collect();
        let r = validate_edges(&flat(4, true), &edges);
        assert!(!r.fixed_pair);
        assert!(r.connected && r.degree_two && r.valid_edges);
        assert!(validate_edges(&flat(4, false), &edges).passed());
    }

    #[test]
    fn tampered_solution_cost() {
        let p = flat(2, true);
        let mut s = CycleSolution::from_order(&p, vec![3, 0, 2, 1], SolveStats::default()).unwrap();
        assert!(validate_solution(&p, &s).passed());
        s.cost += 1e-6;
        let r = validate_solution(&p, &s);
        assert!(!r.cost_consistent && !r.passed());
    }
}
