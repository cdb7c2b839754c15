//! Explicit constraint-level formulations.
//!
//! Two formulations are built here. The simplified one keeps only
//! item→placeholder variables `x_i_p` with degree-two rows. The generalized
//! one has directed arcs in both directions, adjacency indicators `a_i_p`
//! coupling each arc to its pair, and anti-parallel rows. Connectivity is
//! never stated up front: [`ModelSpec::add_subtour_cut`] appends cuts as
//! separation finds violated subtours.

mod binary;
mod lp;
mod validate;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::problem::{Compat, Edge, Problem};
use crate::tour::{cycles_of, CycleSolution};
use crate::{Error, Result};

pub use binary::{solve_binary, BinaryOutcome};
pub use lp::to_lp_string;
pub use validate::{validate_edge_solution, validate_edges, validate_solution, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Simplified,
    Generalized,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Simplified => "simplified",
            Variant::Generalized => "generalized",
        }
    }
}

/// What a binary variable stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarRole {
    /// Arc `from -> to` between global node ids (`x_from_to`).
    Route { from: usize, to: usize },
    /// Adjacency indicator of item and placeholder, global ids (`a_item_slot`).
    Assign { item: usize, slot: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub role: VarRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }

    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        const TOL: f64 = 1e-9;
        match self {
            Sense::Le => lhs <= rhs + TOL,
            Sense::Eq => (lhs - rhs).abs() <= TOL,
            Sense::Ge => lhs >= rhs - TOL,
        }
    }
}

/// A linear row over variable indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[u8]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * f64::from(values[v])).sum()
    }
}

/// `sum of route arcs with both ends in S <= |S| - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubtourCut {
    nodes: Vec<usize>,
}

impl SubtourCut {
    /// Sorted node ids.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn rhs(&self) -> f64 {
        (self.nodes.len() - 1) as f64
    }

    pub fn contains(&self, node: usize) -> bool {
        self.nodes.binary_search(&node).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    variant: Variant,
    n: usize,
    fixed_pair: bool,
    variables: Vec<Variable>,
    objective: Vec<(usize, f64)>,
    constraints: Vec<Constraint>,
    cuts: Vec<SubtourCut>,
    index: BTreeMap<String, usize>,
}

impl ModelSpec {
    fn empty(variant: Variant, n: usize, fixed_pair: bool) -> Self {
        Self {
            variant,
            n,
            fixed_pair,
            variables: Vec::new(),
            objective: Vec::new(),
            constraints: Vec::new(),
            cuts: Vec::new(),
            index: BTreeMap::new(),
        }
    }

    fn add_var(&mut self, role: VarRole) -> usize {
        let name = match role {
            VarRole::Route { from, to } => format!("x_{from}_{to}"),
            VarRole::Assign { item, slot } => format!("a_{item}_{slot}"),
        };
        let k = self.variables.len();
        self.index.insert(name.clone(), k);
        self.variables.push(Variable { name, role });
        k
    }

    fn add_row(&mut self, name: String, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.constraints.push(Constraint { name, terms, sense, rhs });
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn fixed_pair(&self) -> bool {
        self.fixed_pair
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn objective(&self) -> &[(usize, f64)] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn cuts(&self) -> &[SubtourCut] {
        &self.cuts
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Index of route variable `x_from_to`, if the formulation has it.
    pub fn route_var(&self, from: usize, to: usize) -> Option<usize> {
        let n = self.n;
        match self.variant {
            Variant::Simplified => (from < n && to >= n && to < 2 * n).then(|| from * n + (to - n)),
            Variant::Generalized => {
                if from < n && to >= n && to < 2 * n {
                    Some(from * n + (to - n))
                } else if from >= n && from < 2 * n && to < n {
                    Some(n * n + to * n + (from - n))
                } else {
                    None
                }
            }
        }
    }

    /// Appends the subtour cut for `nodes`; returns `false` if an identical
    /// cut is already present.
    pub fn add_subtour_cut(&mut self, nodes: &[usize]) -> Result<bool> {
        let total = 2 * self.n;
        let mut s: Vec<usize> = nodes.to_vec();
        s.sort_unstable();
        s.dedup();
        if s.is_empty() {
            return Err(Error::InvalidCut(String::from("empty node set")));
        }
        if let Some(bad) = s.iter().find(|v| **v >= total) {
            return Err(Error::InvalidCut(format!("node {bad} outside 0..{total}")));
        }
        if s.len() == total {
            return Err(Error::InvalidCut(String::from("node set covers every node")));
        }
        if self.cuts.iter().any(|c| c.nodes == s) {
            return Ok(false);
        }
        self.cuts.push(SubtourCut { nodes: s });
        Ok(true)
    }

    /// A cut rendered as an ordinary row over the route variables inside it.
    pub fn cut_row(&self, k: usize) -> Constraint {
        let cut = &self.cuts[k];
        let terms = self
            .variables
            .iter()
            .enumerate()
            .filter_map(|(idx, v)| match v.role {
                VarRole::Route { from, to } if cut.contains(from) && cut.contains(to) => Some((idx, 1.0)),
                _ => None,
            })
            .collect();
        Constraint {
            name: format!("sec_{k}"),
            terms,
            sense: Sense::Le,
            rhs: cut.rhs(),
        }
    }

    /// Structural rows followed by every cut row.
    pub fn all_rows(&self) -> Vec<Constraint> {
        let mut rows = self.constraints.clone();
        rows.extend((0..self.cuts.len()).map(|k| self.cut_row(k)));
        rows
    }

    pub fn objective_value(&self, values: &[u8]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * f64::from(values[v])).sum()
    }
}

/// Item→placeholder variables only, degree two everywhere, and the
/// `x_{n-1,2n-1} = 1` row when the fixed pair is active.
///
/// The reverse-direction half of the fixed pair (`x_{2n-1,n-1} = 0`) has no
/// variable here; tour orientation enforces it instead.
pub fn build_simplified(problem: &Problem) -> ModelSpec {
    let n = problem.n();
    let cost = problem.cost();
    let mut m = ModelSpec::empty(Variant::Simplified, n, problem.fixed_pair());
    for i in 0..n {
        for p in 0..n {
            let v = m.add_var(VarRole::Route { from: i, to: n + p });
            m.objective.push((v, cost.get(i, p)));
        }
    }
    for i in 0..n {
        let terms = (0..n).map(|p| (i * n + p, 1.0)).collect();
        m.add_row(format!("deg_{i}"), terms, Sense::Eq, 2.0);
    }
    for p in 0..n {
        let terms = (0..n).map(|i| (i * n + p, 1.0)).collect();
        m.add_row(format!("deg_{}", n + p), terms, Sense::Eq, 2.0);
    }
    if problem.fixed_pair() {
        let v = (n - 1) * n + (n - 1);
        m.add_row(format!("fix_x_{}_{}", n - 1, 2 * n - 1), vec![(v, 1.0)], Sense::Eq, 1.0);
    }
    m
}

/// Directed arcs both ways, adjacency indicators, coupling and anti-parallel
/// rows. `compat` (or the problem's own mask) pins `a_i_p = 0` for pairs that
/// may not be adjacent.
pub fn build_generalized(problem: &Problem, compat: Option<&Compat>) -> Result<ModelSpec> {
    let n = problem.n();
    let cost = problem.cost();
    let compat = compat.or(problem.compat());
    if let Some(c) = compat {
        check_compat(c, problem.locked_edge())?;
    }
    let mut m = ModelSpec::empty(Variant::Generalized, n, problem.fixed_pair());
    for i in 0..n {
        for p in 0..n {
            let v = m.add_var(VarRole::Route { from: i, to: n + p });
            m.objective.push((v, cost.get(i, p)));
        }
    }
    for i in 0..n {
        for p in 0..n {
            let v = m.add_var(VarRole::Route { from: n + p, to: i });
            m.objective.push((v, cost.get(i, p)));
        }
    }
    for i in 0..n {
        for p in 0..n {
            m.add_var(VarRole::Assign { item: i, slot: n + p });
        }
    }
    let fwd = |i: usize, p: usize| i * n + p;
    let bwd = |i: usize, p: usize| n * n + i * n + p;
    let adj = |i: usize, p: usize| 2 * n * n + i * n + p;

    for i in 0..n {
        let terms = (0..n).flat_map(|p| [(fwd(i, p), 1.0), (bwd(i, p), 1.0)]).collect();
        m.add_row(format!("deg_{i}"), terms, Sense::Eq, 2.0);
    }
    for p in 0..n {
        let terms = (0..n).flat_map(|i| [(fwd(i, p), 1.0), (bwd(i, p), 1.0)]).collect();
        m.add_row(format!("deg_{}", n + p), terms, Sense::Eq, 2.0);
    }
    for i in 0..n {
        let terms = (0..n).map(|p| (adj(i, p), 1.0)).collect();
        m.add_row(format!("asg_{i}"), terms, Sense::Eq, 2.0);
    }
    for p in 0..n {
        let terms = (0..n).map(|i| (adj(i, p), 1.0)).collect();
        m.add_row(format!("asg_{}", n + p), terms, Sense::Eq, 2.0);
    }
    for i in 0..n {
        for p in 0..n {
            let (ii, pp) = (i, n + p);
            m.add_row(format!("cpl_{ii}_{pp}"), vec![(fwd(i, p), 1.0), (adj(i, p), -1.0)], Sense::Le, 0.0);
            m.add_row(format!("cpl_{pp}_{ii}"), vec![(bwd(i, p), 1.0), (adj(i, p), -1.0)], Sense::Le, 0.0);
        }
    }
    for i in 0..n {
        for p in 0..n {
            m.add_row(format!("anti_{i}_{}", n + p), vec![(fwd(i, p), 1.0), (bwd(i, p), 1.0)], Sense::Le, 1.0);
        }
    }
    if problem.fixed_pair() {
        let (i, p) = (n - 1, n - 1);
        let (gi, gp) = (n - 1, 2 * n - 1);
        m.add_row(format!("fix_a_{gi}_{gp}"), vec![(adj(i, p), 1.0)], Sense::Eq, 1.0);
        m.add_row(format!("fix_x_{gi}_{gp}"), vec![(fwd(i, p), 1.0)], Sense::Eq, 1.0);
        m.add_row(format!("fix_x_{gp}_{gi}"), vec![(bwd(i, p), 1.0)], Sense::Eq, 0.0);
    }
    if let Some(c) = compat {
        for i in 0..n {
            for p in 0..n {
                if !c.allows(i, p) {
                    m.add_row(format!("compat_{i}_{}", n + p), vec![(adj(i, p), 1.0)], Sense::Eq, 0.0);
                }
            }
        }
    }
    Ok(m)
}

/// Each node needs two admissible neighbours, and the fixed pair must be admissible.
fn check_compat(c: &Compat, locked: Option<Edge>) -> Result<()> {
    let n = c.n();
    for i in 0..n {
        let k = (0..n).filter(|&p| c.allows(i, p)).count();
        if k < 2 {
            return Err(Error::InvalidCompat(format!("item {i} admits {k} placeholders, needs 2")));
        }
    }
    for p in 0..n {
        let k = (0..n).filter(|&i| c.allows(i, p)).count();
        if k < 2 {
            return Err(Error::InvalidCompat(format!("placeholder {} admits {k} items, needs 2", n + p)));
        }
    }
    if let Some(e) = locked {
        if !c.allows(e.item, e.slot) {
            return Err(Error::InvalidCompat(format!(
                "fixed pair ({}, {}) is not compatible",
                e.item,
                n + e.slot
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionSource {
    Internal,
    External,
}

/// A 0/1 value for every variable of a [`ModelSpec`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSolution {
    values: Vec<u8>,
    source: SolutionSource,
}

impl EdgeSolution {
    pub fn from_values(model: &ModelSpec, values: Vec<u8>, source: SolutionSource) -> Result<Self> {
        if values.len() != model.variables.len() {
            return Err(Error::InvalidParameter(format!(
                "{} values for {} variables",
                values.len(),
                model.variables.len()
            )));
        }
        if values.iter().any(|v| *v > 1) {
            return Err(Error::InvalidParameter(String::from("values must be 0 or 1")));
        }
        Ok(Self { values, source })
    }

    /// Named values; unnamed variables are 0.
    pub fn from_named<'a, I>(model: &ModelSpec, pairs: I, source: SolutionSource) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, u8)>,
    {
        let mut values = vec![0u8; model.variables.len()];
        for (name, v) in pairs {
            let k = model.var_index(name).ok_or_else(|| Error::UnknownVariable(String::from(name)))?;
            if v > 1 {
                return Err(Error::InvalidParameter(format!("{name} = {v} is not binary")));
            }
            values[k] = v;
        }
        Ok(Self { values, source })
    }

    /// Encodes a tour: simplified models set `x_i_p` per edge; generalized
    /// ones set the arcs in travel direction plus the adjacency indicators.
    pub fn from_tour(model: &ModelSpec, tour: &CycleSolution) -> Result<Self> {
        let n = model.n;
        let mut values = vec![0u8; model.variables.len()];
        match model.variant {
            Variant::Simplified => {
                for e in &tour.edges {
                    values[e.item * n + e.slot] = 1;
                }
            }
            Variant::Generalized => {
                for (u, v) in tour.directed_edges() {
                    let k = model
                        .route_var(u, v)
                        .ok_or_else(|| Error::InvalidOrder(format!("arc {u}->{v} has no variable")))?;
                    values[k] = 1;
                }
                for e in &tour.edges {
                    values[2 * n * n + e.item * n + e.slot] = 1;
                }
            }
        }
        Ok(Self { values, source: SolutionSource::Internal })
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn source(&self) -> SolutionSource {
        self.source
    }

    pub fn value(&self, model: &ModelSpec, name: &str) -> Option<u8> {
        model.var_index(name).map(|k| self.values[k])
    }

    /// Undirected edges of every route arc set to 1 (parallel arcs repeat).
    pub fn route_edges(&self, model: &ModelSpec) -> Vec<Edge> {
        let n = model.n;
        model
            .variables
            .iter()
            .zip(&self.values)
            .filter(|(_, v)| **v == 1)
            .filter_map(|(var, _)| match var.role {
                VarRole::Route { from, to } => Edge::from_nodes(n, from, to),
                VarRole::Assign { .. } => None,
            })
            .collect()
    }
}

/// Separation: the connected cycles of a degree-feasible integral solution.
///
/// Sets are sorted ascending and listed by size, ties by smallest member.
/// More than one set means the solution violates connectivity.
pub fn detect_subtours(model: &ModelSpec, solution: &EdgeSolution) -> Result<Vec<Vec<usize>>> {
    let edges = solution.route_edges(model);
    let mut sets = cycles_of(model.n, &edges)?;
    for s in &mut sets {
        s.sort_unstable();
    }
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then(a[0].cmp(&b[0])));
    Ok(sets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{CostMatrix, Instance, Point};

    fn problem(n: usize) -> Problem {
        let inst = crate::instance::generate(n, 1, 5).unwrap().remove(&1000).unwrap();
        Problem::from_instance(&inst)
    }

    #[test]
    fn simplified_counts() {
        let m = build_simplified(&problem(3));
        assert_eq!(m.variables().len(), 9);
        assert_eq!(m.constraints().iter().filter(|c| c.name.starts_with("deg_")).count(), 6);
        assert_eq!(m.constraints().iter().filter(|c| c.name.starts_with("fix_")).count(), 1);
        assert_eq!(m.constraints().len(), 7);
    }

    #[test]
    fn simplified_objective_is_cost() {
        let inst = Instance::new(
            1000,
            vec![
                Point::new(0.521386, 0.603842),
                Point::new(0.470942, 0.203248),
                Point::new(0.528759, 0.191036),
            ],
            vec![
                Point::new(0.974764, 0.153932),
                Point::new(0.699089, 0.447241),
                Point::new(0.017513, 0.291025),
            ],
        )
        .unwrap();
        let p = Problem::from_instance(&inst);
        let m = build_simplified(&p);
        let k = m.var_index("x_0_3").unwrap();
        let coef = m.objective().iter().find(|(v, _)| *v == k).unwrap().1;
        assert!((coef - 0.6387).abs() < 1e-4);
        for &(v, c) in m.objective() {
            let VarRole::Route { from, to } = m.variables()[v].role else { panic!() };
            assert_eq!(c, p.cost().between(from, to));
        }
    }

    #[test]
    fn generalized_counts() {
        let m = build_generalized(&problem(3), None).unwrap();
        let count = |prefix: &str| m.constraints().iter().filter(|c| c.name.starts_with(prefix)).count();
        assert_eq!(m.variables().iter().filter(|v| v.name.starts_with("x_")).count(), 18);
        assert_eq!(m.variables().iter().filter(|v| v.name.starts_with("a_")).count(), 9);
        assert_eq!(count("deg_"), 6);
        assert_eq!(count("asg_"), 6);
        assert_eq!(count("cpl_"), 18);
        assert_eq!(count("anti_"), 9);
        assert_eq!(count("fix_"), 3);
        assert_eq!(m.constraints().len(), 42);
        for (k, v) in m.variables().iter().enumerate() {
            if let VarRole::Route { from, to } = v.role {
                assert_eq!(m.route_var(from, to), Some(k));
            }
        }
    }

    #[test]
    fn generalized_rejects_thin_compat() {
        let cm = CostMatrix::from_rows(2, vec![1.0; 4]).unwrap();
        let p = Problem::new(cm, true, None).unwrap();
        let c = Compat::from_lists(2, &[vec![0], vec![0, 1]]).unwrap();
        assert!(matches!(build_generalized(&p, Some(&c)), Err(Error::InvalidCompat(_))));
    }

    #[test]
    fn cuts_are_deduplicated_and_checked() {
        let mut m = build_simplified(&problem(4));
        assert!(m.add_subtour_cut(&[0, 4, 1, 5]).unwrap());
        assert!(!m.add_subtour_cut(&[5, 1, 4, 0]).unwrap());
        assert_eq!(m.cuts().len(), 1);
        assert_eq!(m.cuts()[0].rhs(), 3.0);
        let row = m.cut_row(0);
        assert_eq!(row.terms.len(), 4);
        assert!(matches!(m.add_subtour_cut(&[]), Err(Error::InvalidCut(_))));
        let all: Vec<usize> = (0..8).collect();
        assert!(matches!(m.add_subtour_cut(&all), Err(Error::InvalidCut(_))));
        assert!(matches!(m.add_subtour_cut(&[9]), Err(Error::InvalidCut(_))));
    }

    #[test]
    fn subtours_smallest_first() {
        let m = build_simplified(&problem(4));
        let on = ["x_2_6", "x_2_7", "x_3_6", "x_3_7", "x_0_4", "x_0_5", "x_1_4", "x_1_5"];
        let s = EdgeSolution::from_named(&m, on.iter().map(|n| (*n, 1)), SolutionSource::Internal).unwrap();
        assert_eq!(detect_subtours(&m, &s).unwrap(), vec![vec![0, 1, 4, 5], vec![2, 3, 6, 7]]);
        let mut vals = s.values().to_vec();
        vals[m.var_index("x_0_4").unwrap()] = 0;
        let broken = EdgeSolution::from_values(&m, vals, SolutionSource::Internal).unwrap();
        assert!(matches!(detect_subtours(&m, &broken), Err(Error::NotTwoFactor { .. })));
    }

    #[test]
    fn k22_single_set() {
        let m = build_simplified(&problem(2));
        let s = EdgeSolution::from_values(&m, vec![1; 4], SolutionSource::Internal).unwrap();
        assert_eq!(detect_subtours(&m, &s).unwrap(), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn unknown_variable_is_reported() {
        let m = build_simplified(&problem(2));
        let e = EdgeSolution::from_named(&m, [("x_9_9", 1)], SolutionSource::External);
        assert_eq!(e, Err(Error::UnknownVariable("x_9_9".into())));
    }
}
