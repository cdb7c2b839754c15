//! Tours: cycle extraction from edge sets, orientation, and the delivery
//! assignment recovered from the direction of travel.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::problem::{Edge, Problem};
use crate::{Error, Result};

/// Search instrumentation attached to every solution.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveStats {
    pub nodes_explored: u64,
    pub subtours_branched: u64,
    pub best_bound: f64,
    pub incumbent_cost: f64,
    /// Wall-clock seconds, filled in by the caller that owns a clock.
    pub dt: f64,
    pub timed_out: bool,
    /// Binary variables of the formulation being solved: `n²` or `3n²`.
    pub binary_var_count: usize,
}

impl SolveStats {
    /// `(incumbent - bound) / incumbent`; zero proves optimality.
    pub fn gap(&self) -> f64 {
        if self.incumbent_cost <= 0.0 {
            return 0.0;
        }
        ((self.incumbent_cost - self.best_bound) / self.incumbent_cost).max(0.0)
    }
}

/// A directed alternating tour with its derived delivery assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleSolution {
    /// Global node ids, starting on a placeholder and alternating sides.
    pub order: Vec<usize>,
    /// The `2n` undirected edges, sorted.
    pub edges: Vec<Edge>,
    /// `assignment[i]` is the global id of the placeholder item `i` is carried to.
    pub assignment: Vec<usize>,
    pub cost: f64,
    pub stats: SolveStats,
}

impl CycleSolution {
    pub fn from_order(problem: &Problem, order: Vec<usize>, stats: SolveStats) -> Result<Self> {
        let n = problem.n();
        let assignment = derive_assignment(n, &order)?;
        let mut edges: Vec<Edge> = (0..order.len())
            .map(|k| Edge::from_nodes(n, order[k], order[(k + 1) % order.len()]))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::InvalidOrder(String::from("consecutive nodes on the same side")))?;
        edges.sort_unstable();
        let cost = problem.tour_cost(&order);
        Ok(Self { order, edges, assignment, cost, stats })
    }

    /// Orients an undirected Hamiltonian edge set and wraps it as a solution.
    pub fn from_edges(problem: &Problem, edges: &[Edge], stats: SolveStats) -> Result<Self> {
        let order = orient_tour(problem, edges)?;
        Self::from_order(problem, order, stats)
    }

    /// Directed edges `(from, to)` along the tour, closing edge last.
    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        let len = self.order.len();
        (0..len).map(|k| (self.order[k], self.order[(k + 1) % len])).collect()
    }
}

/// Splits an item–placeholder edge list into its cycles.
///
/// Every node `0..2n` must have degree exactly two. Each cycle is returned as
/// a node sequence in traversal order, starting at its smallest node and
/// stepping first to that node's smaller neighbour. Cycles are listed by
/// their smallest node.
pub fn cycles_of(n: usize, edges: &[Edge]) -> Result<Vec<Vec<usize>>> {
    let nodes = 2 * n;
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(2); nodes];
    for (k, e) in edges.iter().enumerate() {
        if e.item >= n || e.slot >= n {
            return Err(Error::InvalidCycle(format!("edge ({}, {}) out of range for n = {n}", e.item, e.slot)));
        }
        let (u, v) = e.nodes(n);
        adj[u].push((v, k));
        adj[v].push((u, k));
    }
    if let Some((node, list)) = adj.iter().enumerate().find(|(_, l)| l.len() != 2) {
        return Err(Error::NotTwoFactor { node, degree: list.len() });
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    let mut seen = vec![false; nodes];
    let mut cycles = Vec::new();
    for start in 0..nodes {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut cur = start;
        let mut via = usize::MAX;
        loop {
            seen[cur] = true;
            cycle.push(cur);
            let (next, edge) = if adj[cur][0].1 != via { adj[cur][0] } else { adj[cur][1] };
            if next == start {
                break;
            }
            via = edge;
            cur = next;
        }
        cycles.push(cycle);
    }
    Ok(cycles)
}

/// Turns an undirected Hamiltonian cycle into a directed node order.
///
/// With the fixed pair the tour starts at placeholder `2n-1`, leaves towards
/// its neighbour other than item `n-1`, and so ends `n-1 -> 2n-1`. Otherwise
/// it starts at placeholder `n` and steps to its lower-id item neighbour,
/// unless only the opposite direction respects the compatibility mask.
pub fn orient_tour(problem: &Problem, edges: &[Edge]) -> Result<Vec<usize>> {
    let n = problem.n();
    if edges.len() != 2 * n {
        return Err(Error::InvalidCycle(format!("{} edges, expected {}", edges.len(), 2 * n)));
    }
    let cycles = cycles_of(n, edges).map_err(|e| match e {
        Error::NotTwoFactor { node, degree } => {
            Error::InvalidCycle(format!("node {node} has degree {degree}"))
        }
        other => other,
    })?;
    if cycles.len() != 1 {
        return Err(Error::InvalidCycle(format!("{} disjoint cycles", cycles.len())));
    }
    let cycle = &cycles[0];
    if cycle.len() != 2 * n {
        return Err(Error::InvalidCycle(String::from("repeated edge")));
    }
    let pos_of = |node: usize| cycle.iter().position(|&v| v == node).unwrap_or(0);
    let walk = |start: usize, forward: bool| -> Vec<usize> {
        let s = pos_of(start);
        let len = cycle.len();
        (0..len)
            .map(|k| if forward { cycle[(s + k) % len] } else { cycle[(s + len - k) % len] })
            .collect()
    };
    let len = cycle.len();
    if problem.fixed_pair() {
        let start = 2 * n - 1;
        let s = pos_of(start);
        let next = cycle[(s + 1) % len];
        let prev = cycle[(s + len - 1) % len];
        if next != n - 1 && prev != n - 1 {
            return Err(Error::InvalidCycle(format!("fixed pair edge {{{}, {start}}} missing", n - 1)));
        }
        Ok(walk(start, next != n - 1))
    } else {
        let start = n;
        let s = pos_of(start);
        let next = cycle[(s + 1) % len];
        let prev = cycle[(s + len - 1) % len];
        let canonical = walk(start, next < prev);
        if problem.compat().is_some() && !problem.respects_types(&canonical) {
            let reversed = walk(start, next >= prev);
            if problem.respects_types(&reversed) {
                return Ok(reversed);
            }
        }
        Ok(canonical)
    }
}

/// Maps each item to the placeholder visited immediately after it.
pub fn derive_assignment(n: usize, order: &[usize]) -> Result<Vec<usize>> {
    if order.len() != 2 * n {
        return Err(Error::InvalidOrder(format!("length {} for n = {n}", order.len())));
    }
    if order[0] < n {
        return Err(Error::InvalidOrder(String::from("order must start at a placeholder")));
    }
    let mut seen = vec![false; 2 * n];
    let mut assignment = vec![usize::MAX; n];
    for k in 0..order.len() {
        let u = order[k];
        let v = order[(k + 1) % order.len()];
        if u >= 2 * n || seen[u] {
            return Err(Error::InvalidOrder(format!("node {u} repeated or out of range")));
        }
        seen[u] = true;
        if (u < n) == (v < n) {
            return Err(Error::InvalidOrder(format!("nodes {u} and {v} are on the same side")));
        }
        if u < n {
            assignment[u] = v;
        }
    }
    Ok(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Instance, Point};

    fn square(fixed: bool) -> Problem {
        let inst = Instance::new(
            1,
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)],
            vec![Point::new(0.0, 1.0), Point::new(1.0, 1.0)],
        )
        .unwrap()
        .with_fixed_pair(fixed);
        Problem::from_instance(&inst)
    }

    fn k22() -> Vec<Edge> {
        vec![Edge::new(0, 0), Edge::new(0, 1), Edge::new(1, 0), Edge::new(1, 1)]
    }

    #[test]
    fn orientation_with_fixed_pair() {
        let p = square(true);
        assert_eq!(orient_tour(&p, &k22()).unwrap(), vec![3, 0, 2, 1]);
        let mut rev = k22();
        rev.reverse();
        assert_eq!(orient_tour(&p, &rev).unwrap(), vec![3, 0, 2, 1]);
    }

    #[test]
    fn orientation_without_fixed_pair() {
        let p = square(false);
        assert_eq!(orient_tour(&p, &k22()).unwrap(), vec![2, 0, 3, 1]);
    }

    #[test]
    fn rejects_disconnected_and_short() {
        let p = Problem::new(
            crate::instance::CostMatrix::from_rows(4, vec![1.0; 16]).unwrap(),
            true,
            None,
        )
        .unwrap();
        // {0,4,1,5} and {2,6,3,7}
        let two = vec![
            Edge::new(0, 0),
            Edge::new(0, 1),
            Edge::new(1, 0),
            Edge::new(1, 1),
            Edge::new(2, 2),
            Edge::new(2, 3),
            Edge::new(3, 2),
            Edge::new(3, 3),
        ];
        assert!(matches!(orient_tour(&p, &two), Err(Error::InvalidCycle(_))));
        let cycles = cycles_of(4, &two).unwrap();
        assert_eq!(cycles, vec![vec![0, 4, 1, 5], vec![2, 6, 3, 7]]);
        assert!(matches!(orient_tour(&p, &two[..4]), Err(Error::InvalidCycle(_))));
    }

    #[test]
    fn assignment_follows_successor() {
        assert_eq!(derive_assignment(2, &[3, 0, 2, 1]).unwrap(), vec![2, 3]);
        assert!(matches!(derive_assignment(2, &[0, 3, 1, 2]), Err(Error::InvalidOrder(_))));
        assert!(matches!(derive_assignment(2, &[3, 2, 0, 1]), Err(Error::InvalidOrder(_))));
        assert!(matches!(derive_assignment(2, &[3, 0, 3, 1]), Err(Error::InvalidOrder(_))));
    }

    #[test]
    fn solution_from_edges() {
        let p = square(true);
        let s = CycleSolution::from_edges(&p, &k22(), SolveStats::default()).unwrap();
        assert_eq!(s.order, vec![3, 0, 2, 1]);
        assert_eq!(s.assignment, vec![2, 3]);
        assert!((s.cost - 4.828427124746190).abs() < 1e-12);
        assert_eq!(s.directed_edges(), vec![(3, 0), (0, 2), (2, 1), (1, 3)]);
    }
}
