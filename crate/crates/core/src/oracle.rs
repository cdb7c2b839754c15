//! Exhaustive enumeration of alternating Hamiltonian cycles on `K_{n,n}`.
//!
//! Ground truth for small instances only: `n!·(n-1)!/2` cycles exist.

use alloc::vec::Vec;

use crate::problem::{Edge, Problem};
use crate::tour::{orient_tour, CycleSolution, SolveStats};
use crate::{Error, Result};

pub const MIN_N: usize = 2;
pub const MAX_N: usize = 7;

/// Streams every undirected alternating Hamiltonian cycle exactly once.
///
/// Cycles are generated as `item 0, P[0], I[0], P[1], ..., I[n-2], P[n-1]`
/// over all placeholder permutations `P` and orderings `I` of the remaining
/// items; of the two traversal directions only the one with `P[0] < P[n-1]`
/// is kept.
#[derive(Debug, Clone)]
pub struct TourEnumerator {
    n: usize,
    fixed_pair: bool,
    slots: Vec<usize>,
    items: Vec<usize>,
    exhausted: bool,
}

impl TourEnumerator {
    /// Next cycle as a node sequence starting at item 0.
    pub fn next_sequence(&mut self) -> Option<Vec<usize>> {
        while !self.exhausted {
            let keep = self.slots[0] < self.slots[self.n - 1]
                && (!self.fixed_pair || self.contains_locked_edge());
            let seq = keep.then(|| self.sequence());
            self.advance();
            if seq.is_some() {
                return seq;
            }
        }
        None
    }

    fn sequence(&self) -> Vec<usize> {
        let n = self.n;
        let mut seq = Vec::with_capacity(2 * n);
        seq.push(0);
        for k in 0..n {
            seq.push(n + self.slots[k]);
            if k + 1 < n {
                seq.push(self.items[k]);
            }
        }
        seq
    }

    fn contains_locked_edge(&self) -> bool {
        let n = self.n;
        let last = n - 1;
        // items[k] sits between slots[k] and slots[k + 1]
        let k = self.items.iter().position(|&i| i == last).unwrap_or(0);
        self.slots[k] == last || self.slots[k + 1] == last
    }

    fn advance(&mut self) {
        if !next_permutation(&mut self.items) && !next_permutation(&mut self.slots) {
            self.exhausted = true;
        }
    }
}

impl Iterator for TourEnumerator {
    type Item = Vec<Edge>;

    fn next(&mut self) -> Option<Vec<Edge>> {
        let n = self.n;
        let seq = self.next_sequence()?;
        let mut edges: Vec<Edge> = (0..seq.len())
            .map(|k| Edge::from_nodes(n, seq[k], seq[(k + 1) % seq.len()]).expect("alternating"))
            .collect();
        edges.sort_unstable();
        Some(edges)
    }
}

/// Lexicographic successor; returns `false` (after resetting to the first
/// permutation) once the sequence wraps.
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        v.reverse();
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// All cycles on `K_{n,n}`; with `fixed_pair`, only those using `{n-1, 2n-1}`.
pub fn enumerate_tours(n: usize, fixed_pair: bool) -> Result<TourEnumerator> {
    if !(MIN_N..=MAX_N).contains(&n) {
        return Err(Error::TooLarge { n, min: MIN_N, max: MAX_N });
    }
    Ok(TourEnumerator {
        n,
        fixed_pair,
        slots: (0..n).collect(),
        items: (1..n).collect(),
        exhausted: false,
    })
}

/// The cheapest enumerated cycle, oriented like the exact solver orients.
///
/// Ties go to the lexicographically smallest oriented order. When the problem
/// carries a compatibility mask, only type-respecting tours are considered.
pub fn brute_force_optimum(problem: &Problem) -> Result<CycleSolution> {
    let n = problem.n();
    let mut tours = enumerate_tours(n, problem.fixed_pair())?;
    let mut best: Option<(f64, Vec<usize>)> = None;
    while let Some(seq) = tours.next_sequence() {
        let cost = problem.tour_cost(&seq);
        if let Some((b, _)) = &best {
            if cost > *b + 1e-12 {
                continue;
            }
        }
        let edges: Vec<Edge> = (0..seq.len())
            .map(|k| Edge::from_nodes(n, seq[k], seq[(k + 1) % seq.len()]).expect("alternating"))
            .collect();
        let order = orient_tour(problem, &edges)?;
        if !problem.respects_types(&order) {
            continue;
        }
        let better = match &best {
            None => true,
            Some((b, o)) => cost < *b - 1e-12 || order < *o,
        };
        if better {
            best = Some((cost, order));
        }
    }
    let (_, order) = best.ok_or(Error::Infeasible)?;
    let mut sol = CycleSolution::from_order(problem, order, SolveStats::default())?;
    sol.stats.best_bound = sol.cost;
    sol.stats.incumbent_cost = sol.cost;
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{CostMatrix, Instance, Point};
    use alloc::collections::BTreeSet;
    use alloc::vec;

    fn factorial(k: usize) -> usize {
        (1..=k).product()
    }

    #[test]
    fn counts_match_closed_forms() {
        for n in 2..=5 {
            let free = enumerate_tours(n, false).unwrap().count();
            let fixed = enumerate_tours(n, true).unwrap().count();
            assert_eq!(free, factorial(n) * factorial(n - 1) / 2, "free n={n}");
            assert_eq!(fixed, factorial(n - 1) * factorial(n - 1), "fixed n={n}");
        }
        assert_eq!(enumerate_tours(3, false).unwrap().count(), 6);
        assert_eq!(enumerate_tours(3, true).unwrap().count(), 4);
        assert_eq!(enumerate_tours(2, false).unwrap().count(), 1);
    }

    #[test]
    fn each_cycle_once() {
        let all: Vec<_> = enumerate_tours(4, false).unwrap().collect();
        let unique: BTreeSet<_> = all.iter().cloned().collect();
        assert_eq!(all.len(), unique.len());
        for e in &all {
            let cycles = crate::tour::cycles_of(4, e).unwrap();
            assert_eq!(cycles.len(), 1);
            assert_eq!(cycles[0].len(), 8);
        }
    }

    #[test]
    fn size_cap() {
        assert!(matches!(enumerate_tours(1, false), Err(Error::TooLarge { .. })));
        assert!(matches!(enumerate_tours(8, true), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn unit_square_optimum() {
        let inst = Instance::new(
            1,
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)],
            vec![Point::new(0.0, 1.0), Point::new(1.0, 1.0)],
        )
        .unwrap();
        let sol = brute_force_optimum(&Problem::from_instance(&inst)).unwrap();
        assert!((sol.cost - (2.0 + 2.0 * 2f64.sqrt())).abs() < 1e-9);
        assert_eq!(sol.order, vec![3, 0, 2, 1]);
    }

    #[test]
    fn minimum_over_every_cycle() {
        let inst = crate::instance::generate(5, 1, 11).unwrap().remove(&1000).unwrap();
        let p = Problem::from_instance(&inst);
        let best = brute_force_optimum(&p).unwrap();
        let c: &CostMatrix = p.cost();
        for tour in enumerate_tours(5, true).unwrap() {
            let cost: f64 = tour.iter().map(|e| c.get(e.item, e.slot)).sum();
            assert!(best.cost <= cost + 1e-12);
        }
    }
}
