//! Exact branch and bound over edge fixings.
//!
//! Every node carries an optimal 2-factor for its fixings. A node whose
//! 2-factor is a single (type-respecting) cycle is solved; otherwise the
//! smallest cycle is broken by inclusion/exclusion branching on its free
//! edges. Children start out with their parent's bound and are evaluated when
//! popped, by re-optimising the parent's flow.
//!
//! [`solve`] is the sequential driver. [`root_node`], [`expand`] and
//! [`Frontier`] are public so other drivers (a thread pool, for instance) can
//! run the same search.

use alloc::boxed::Box;
use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::clock::Clock;
use crate::heuristics::{local_search, LocalSearchParams};
use crate::model::Variant;
use crate::problem::{Edge, Problem};
use crate::relaxation::{EdgeFixings, FlowState, FORBIDDEN, FORCED};
use crate::tour::{cycles_of, CycleSolution, SolveStats};
use crate::{Error, Result, COST_EPS};

pub use crate::tour::{derive_assignment, orient_tour};

/// Unevaluated nodes bounded at a timeout to sharpen the reported bound.
const TIGHTEN_BUDGET: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactParams {
    /// Seconds, measured by the clock handed to [`solve`].
    pub time_limit: f64,
    /// Only read by parallel drivers; [`solve`] itself is sequential.
    pub workers: usize,
    pub seed: u64,
    /// Open nodes kept in best-first order before switching to depth-first.
    pub frontier_cap: usize,
    /// Local-search restarts used to seed the incumbent; 0 disables seeding.
    pub heuristic_restarts: usize,
    /// Perturbation rounds of the seeding local search, per item.
    pub kicks_per_item: usize,
    /// Stop after this many explored nodes, reported like a timeout.
    pub node_limit: Option<u64>,
    /// Formulation the run reports against (`n²` or `3n²` binaries).
    pub variant: Variant,
}

impl Default for ExactParams {
    fn default() -> Self {
        Self {
            time_limit: 300.0,
            workers: 1,
            seed: 0,
            frontier_cap: 1_000_000,
            heuristic_restarts: 4,
            kicks_per_item: 20,
            node_limit: None,
            variant: Variant::Simplified,
        }
    }
}

impl ExactParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.time_limit > 0.0) {
            return Err(Error::InvalidParameter(format!("time limit {} must be positive", self.time_limit)));
        }
        if self.workers == 0 {
            return Err(Error::InvalidParameter("workers must be at least 1".into()));
        }
        if self.frontier_cap == 0 {
            return Err(Error::InvalidParameter("frontier cap must be at least 1".into()));
        }
        Ok(())
    }

    pub fn binary_var_count(&self, n: usize) -> usize {
        match self.variant {
            Variant::Simplified => n * n,
            Variant::Generalized => 3 * n * n,
        }
    }
}

/// Observes the search; used by tests to audit bounds.
pub trait Monitor {
    /// Called once for every node that is expanded, with its exact bound.
    fn on_node(&mut self, _fixings: &EdgeFixings, _bound: f64) {}
    /// Called whenever the incumbent improves.
    fn on_incumbent(&mut self, _cost: f64) {}
}

impl Monitor for () {}

#[derive(Debug)]
struct Evaluated {
    fixings: EdgeFixings,
    flow: FlowState,
}

/// A branched node: its children share it until they are evaluated.
#[derive(Debug)]
struct Family {
    parent: Evaluated,
    free: Vec<Edge>,
}

#[derive(Debug)]
enum State {
    Ready(Box<Evaluated>),
    /// Child `index` of a family, not yet bounded on its own.
    Pending { family: Arc<Family>, index: usize },
}

/// An open subproblem.
///
/// Children are created unevaluated and carry their parent's bound; their own
/// 2-factor is computed when they are popped, by re-optimising the parent's
/// flow. Siblings share the parent state until then.
#[derive(Debug)]
pub struct Node {
    state: State,
    bound: f64,
    depth: u32,
}

impl Node {
    /// Exact relaxation value once evaluated, else the parent's (a lower
    /// bound on it).
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn is_evaluated(&self) -> bool {
        matches!(self.state, State::Ready(_))
    }

    /// The node's fixings (materialised for unevaluated children).
    pub fn fixings(&self) -> EdgeFixings {
        match &self.state {
            State::Ready(e) => e.fixings.clone(),
            State::Pending { family, index } => child_fixings(family, *index),
        }
    }
}

fn child_fixings(family: &Family, index: usize) -> EdgeFixings {
    let mut f = family.parent.fixings.clone();
    for &e in &family.free[..index] {
        f.force(e);
    }
    f.forbid(family.free[index]);
    f
}

/// Bounds an unevaluated child; `None` when no 2-factor respects its fixings.
pub fn evaluate(problem: &Problem, node: Node) -> Option<Node> {
    let (family, index) = match node.state {
        State::Ready(_) => return Some(node),
        State::Pending { family, index } => (family, index),
    };
    let n = problem.n();
    let fixings = child_fixings(&family, index);
    let mut mask = family.parent.fixings.mask(n);
    for e in &family.free[..index] {
        mask[e.item * n + e.slot] = FORCED;
    }
    let dropped = family.free[index];
    mask[dropped.item * n + dropped.slot] = FORBIDDEN;
    let flow = family.parent.flow.repair(problem.cost(), &mask, dropped)?;
    let bound = flow.cost.max(node.bound);
    Some(Node { state: State::Ready(Box::new(Evaluated { fixings, flow })), bound, depth: node.depth })
}

/// Outcome of expanding one node.
#[derive(Debug)]
pub enum Expansion {
    /// The bound cannot beat the incumbent, or no tour extends the fixings.
    Pruned,
    /// Freshly evaluated, its bound now exceeds the requeue threshold.
    Requeue(Node),
    /// The 2-factor is a feasible tour; its cost equals the node bound.
    Tour { order: Vec<usize>, cost: f64 },
    /// Unevaluated children.
    Branched(Vec<Node>),
}

/// The unconstrained 2-factor, with the fixed-pair edge forced if required.
pub fn root_node(problem: &Problem) -> Result<Node> {
    let n = problem.n();
    let mut fixings = EdgeFixings::new();
    if let Some(e) = problem.locked_edge() {
        fixings.force(e);
    }
    let flow = FlowState::solve(problem.cost(), &fixings.mask(n)).ok_or(Error::Infeasible)?;
    let bound = flow.cost;
    Ok(Node { state: State::Ready(Box::new(Evaluated { fixings, flow })), bound, depth: 0 })
}

/// Children of `fixings` for one cycle: child `j` forbids the `j`-th free edge
/// and forces the free edges before it.
///
/// Forced edges of the cycle are skipped: every solution under `fixings`
/// already contains them. The children partition the tours that respect
/// `fixings`, and none of them admits the whole cycle.
pub fn branch(fixings: &EdgeFixings, subtour_edges: &[Edge]) -> Result<Vec<EdgeFixings>> {
    let free: Vec<Edge> = subtour_edges.iter().copied().filter(|e| !fixings.is_forced(*e)).collect();
    if free.is_empty() {
        return Err(Error::Inconsistent("every edge of the subtour is already forced".into()));
    }
    if let Some(e) = free.iter().find(|e| fixings.is_forbidden(**e)) {
        return Err(Error::Inconsistent(format!("subtour uses forbidden edge ({}, {})", e.item, e.slot)));
    }
    let mut out = Vec::with_capacity(free.len());
    let mut base = fixings.clone();
    for &e in &free {
        let mut child = base.clone();
        child.forbid(e);
        out.push(child);
        base.force(e);
    }
    Ok(out)
}

/// Evaluates the node if needed, then bounds and branches it.
///
/// A node whose bound is within [`COST_EPS`] of `incumbent` is pruned. A
/// freshly evaluated node whose bound exceeds `requeue_above` is handed back
/// so a best-first driver can put it behind better open nodes.
pub fn expand(
    problem: &Problem,
    node: Node,
    incumbent: f64,
    requeue_above: f64,
    monitor: &mut dyn Monitor,
) -> Expansion {
    if node.bound >= incumbent - COST_EPS {
        return Expansion::Pruned;
    }
    let fresh = !node.is_evaluated();
    let Some(node) = evaluate(problem, node) else { return Expansion::Pruned };
    if node.bound >= incumbent - COST_EPS {
        return Expansion::Pruned;
    }
    if fresh && node.bound > requeue_above + COST_EPS {
        return Expansion::Requeue(node);
    }
    let State::Ready(eval) = node.state else { unreachable!("evaluated above") };
    monitor.on_node(&eval.fixings, node.bound);
    let n = problem.n();
    let edges = eval.flow.edges();
    let Ok(cycles) = cycles_of(n, &edges) else { return Expansion::Pruned };
    let cycle = if cycles.len() == 1 {
        let Ok(order) = orient_tour(problem, &edges) else { return Expansion::Pruned };
        if problem.respects_types(&order) {
            let cost = problem.tour_cost(&order);
            return Expansion::Tour { order, cost };
        }
        // Hamiltonian but no orientation delivers every item correctly: cut
        // this tour off like a subtour.
        &cycles[0]
    } else {
        // smallest cycle; ties go to the one holding the smallest node id
        cycles.iter().min_by_key(|c| c.len()).expect("at least one cycle")
    };
    let len = cycle.len();
    let free: Vec<Edge> = (0..len)
        .filter_map(|k| Edge::from_nodes(n, cycle[k], cycle[(k + 1) % len]))
        .filter(|e| !eval.fixings.is_forced(*e))
        .collect();
    if free.is_empty() {
        return Expansion::Pruned;
    }
    let k = free.len();
    let family = Arc::new(Family { parent: *eval, free });
    let children = (0..k)
        .map(|index| Node {
            state: State::Pending { family: Arc::clone(&family), index },
            bound: node.bound,
            depth: node.depth + 1,
        })
        .collect();
    Expansion::Branched(children)
}

struct Entry {
    node: Node,
    seq: u64,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    /// Greater means explored first: lower bound, then deeper, then older.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .node
            .bound
            .total_cmp(&self.node.bound)
            .then(self.node.depth.cmp(&other.node.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

/// Open nodes: best-first until `cap` nodes are queued, then depth-first
/// below the node being expanded until that dive is exhausted.
pub struct Frontier {
    heap: BinaryHeap<Entry>,
    stack: Vec<Node>,
    cap: usize,
    seq: u64,
}

impl core::fmt::Debug for Frontier {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Frontier")
            .field("queued", &self.heap.len())
            .field("diving", &self.stack.len())
            .field("cap", &self.cap)
            .finish()
    }
}

impl Frontier {
    pub fn new(cap: usize) -> Self {
        Self { heap: BinaryHeap::new(), stack: Vec::new(), cap: cap.max(1), seq: 0 }
    }

    pub fn len(&self) -> usize {
        self.heap.len() + self.stack.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn push_all(&mut self, nodes: Vec<Node>) {
        if !self.stack.is_empty() || self.heap.len() + nodes.len() > self.cap {
            // first child on top
            self.stack.extend(nodes.into_iter().rev());
        } else {
            for node in nodes {
                self.seq += 1;
                self.heap.push(Entry { node, seq: self.seq });
            }
        }
    }

    /// Puts an evaluated node back into best-first order.
    pub fn requeue(&mut self, node: Node) {
        self.seq += 1;
        self.heap.push(Entry { node, seq: self.seq });
    }

    pub fn pop(&mut self) -> Option<Node> {
        self.stack.pop().or_else(|| self.heap.pop().map(|e| e.node))
    }

    /// Bound above which a freshly evaluated node should be requeued: the
    /// best queued key in best-first mode, `+inf` while diving.
    pub fn requeue_threshold(&self) -> f64 {
        if !self.stack.is_empty() {
            return f64::INFINITY;
        }
        self.heap.peek().map_or(f64::INFINITY, |e| e.node.bound)
    }

    /// Smallest bound among open nodes, `+inf` when empty.
    pub fn min_bound(&self) -> f64 {
        let h = self.heap.peek().map_or(f64::INFINITY, |e| e.node.bound);
        self.stack.iter().map(Node::bound).fold(h, f64::min)
    }

    /// Evaluates unevaluated nodes at the top of the queue (at most `budget`
    /// of them) so that [`Frontier::min_bound`] reflects exact bounds.
    pub fn tighten(&mut self, problem: &Problem, incumbent: f64, budget: usize) {
        for _ in 0..budget {
            let Some(top) = self.heap.peek() else { return };
            if top.node.is_evaluated() || top.node.bound >= incumbent - COST_EPS {
                return;
            }
            let node = self.heap.pop().expect("peeked").node;
            if let Some(node) = evaluate(problem, node) {
                self.requeue(node);
            }
        }
    }
}

/// Incumbent from greedy construction plus local search, if seeding is on.
pub fn initial_incumbent<C: Clock>(problem: &Problem, params: &ExactParams, clock: &C) -> Option<CycleSolution> {
    if params.heuristic_restarts == 0 {
        return None;
    }
    let ls = LocalSearchParams {
        restarts: params.heuristic_restarts,
        seed: params.seed,
        time_limit: params.time_limit * 0.1,
        kicks: params.kicks_per_item * problem.n(),
    };
    local_search(problem, &ls, clock).ok()
}

/// Proven-optimal tour, or the best one found when the time or node limit
/// stops the search (then `stats.timed_out` is set).
pub fn solve<C: Clock>(
    problem: &Problem,
    params: &ExactParams,
    clock: &C,
    monitor: &mut dyn Monitor,
) -> Result<CycleSolution> {
    params.validate()?;
    problem.check_feasible()?;
    let n = problem.n();
    let mut stats = SolveStats { binary_var_count: params.binary_var_count(n), ..SolveStats::default() };

    let mut best: Option<(Vec<usize>, f64)> = None;
    if let Some(seed) = initial_incumbent(problem, params, clock) {
        monitor.on_incumbent(seed.cost);
        best = Some((seed.order, seed.cost));
    }
    let incumbent = |best: &Option<(Vec<usize>, f64)>| best.as_ref().map_or(f64::INFINITY, |b| b.1);

    let root = root_node(problem)?;
    stats.best_bound = root.bound();
    let mut frontier = Frontier::new(params.frontier_cap);
    frontier.push_all(alloc::vec![root]);

    while let Some(node) = frontier.pop() {
        let out_of_time = clock.elapsed_secs() >= params.time_limit
            || params.node_limit.is_some_and(|l| stats.nodes_explored >= l);
        if out_of_time {
            stats.timed_out = true;
            let inc = incumbent(&best);
            frontier.requeue(node);
            frontier.tighten(problem, inc, TIGHTEN_BUDGET);
            stats.best_bound = frontier.min_bound().min(inc).max(stats.best_bound);
            break;
        }
        let inc = incumbent(&best);
        if node.bound() >= inc - COST_EPS {
            continue;
        }
        let threshold = frontier.requeue_threshold();
        match expand(problem, node, inc, threshold, monitor) {
            Expansion::Pruned => {}
            Expansion::Requeue(node) => frontier.requeue(node),
            Expansion::Tour { order, cost } => {
                stats.nodes_explored += 1;
                if cost < inc {
                    monitor.on_incumbent(cost);
                    best = Some((order, cost));
                }
            }
            Expansion::Branched(children) => {
                stats.nodes_explored += 1;
                stats.subtours_branched += 1;
                frontier.push_all(children);
            }
        }
    }

    let (order, cost) = match best {
        Some(b) => b,
        None if stats.timed_out => return Err(Error::TimeoutWithoutSolution),
        None => return Err(Error::Infeasible),
    };
    stats.incumbent_cost = cost;
    if !stats.timed_out {
        stats.best_bound = cost;
    }
    stats.dt = clock.elapsed_secs();
    let mut sol = CycleSolution::from_order(problem, order, stats)?;
    sol.stats.incumbent_cost = sol.cost;
    if !sol.stats.timed_out {
        sol.stats.best_bound = sol.cost;
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate, Instance, Point};
    use crate::oracle::{brute_force_optimum, enumerate_tours};
    use alloc::vec;

    fn problem(n: usize, seed: u64) -> Problem {
        Problem::from_instance(&generate(n, 1, seed).unwrap().remove(&1000).unwrap())
    }

    #[test]
    fn unit_square() {
        let inst = Instance::new(
            1,
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)],
            vec![Point::new(0.0, 1.0), Point::new(1.0, 1.0)],
        )
        .unwrap();
        let sol = solve(&Problem::from_instance(&inst), &ExactParams::default(), &crate::NoClock, &mut ()).unwrap();
        assert!((sol.cost - 4.828427124746190).abs() < 1e-9);
        assert_eq!(sol.order, vec![3, 0, 2, 1]);
        assert_eq!(sol.stats.binary_var_count, 4);
        assert!(!sol.stats.timed_out);
    }

    #[test]
    fn matches_oracle_without_seeding() {
        let params = ExactParams { heuristic_restarts: 0, ..ExactParams::default() };
        for n in 2..=5 {
            for seed in 0..10 {
                let p = problem(n, seed);
                let a = solve(&p, &params, &crate::NoClock, &mut ()).unwrap();
                let b = brute_force_optimum(&p).unwrap();
                assert!((a.cost - b.cost).abs() < 1e-9, "n={n} seed={seed}");
            }
        }
    }

    #[test]
    fn branch_scheme() {
        let es = [Edge::new(0, 0), Edge::new(0, 1), Edge::new(1, 1), Edge::new(1, 0)];
        let kids = branch(&EdgeFixings::new(), &es).unwrap();
        assert_eq!(kids.len(), 4);
        assert_eq!(kids[0].forbidden(), &[es[0]]);
        assert!(kids[0].forced().is_empty());
        assert_eq!(kids[3].forbidden(), &[es[3]]);
        let mut forced = es[..3].to_vec();
        forced.sort_unstable();
        assert_eq!(kids[3].forced(), &forced[..]);
        let all = EdgeFixings::from_parts(es.to_vec(), vec![]);
        assert!(matches!(branch(&all, &es), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn branch_partitions_tours() {
        let n = 4;
        let sub = [Edge::new(0, 0), Edge::new(0, 1), Edge::new(1, 1), Edge::new(1, 0)];
        let kids = branch(&EdgeFixings::new(), &sub).unwrap();
        for tour in enumerate_tours(n, false).unwrap() {
            let fits = |f: &EdgeFixings| {
                f.forced().iter().all(|e| tour.contains(e)) && f.forbidden().iter().all(|e| !tour.contains(e))
            };
            assert_eq!(kids.iter().filter(|k| fits(k)).count(), 1);
        }
    }

    #[test]
    fn node_limit_reports_timeout() {
        let p = problem(7, 2);
        let params = ExactParams { heuristic_restarts: 1, node_limit: Some(1), ..ExactParams::default() };
        let s = solve(&p, &params, &crate::NoClock, &mut ()).unwrap();
        if s.stats.timed_out {
            assert!(s.stats.best_bound <= s.stats.incumbent_cost + 1e-9);
        }
        let none = ExactParams { heuristic_restarts: 0, node_limit: Some(0), ..ExactParams::default() };
        assert_eq!(solve(&p, &none, &crate::NoClock, &mut ()), Err(Error::TimeoutWithoutSolution));
    }

    #[test]
    fn rejects_bad_params() {
        let p = problem(3, 0);
        let bad = ExactParams { time_limit: 0.0, ..ExactParams::default() };
        assert!(matches!(solve(&p, &bad, &crate::NoClock, &mut ()), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn deterministic() {
        let p = problem(6, 9);
        let a = solve(&p, &ExactParams::default(), &crate::NoClock, &mut ()).unwrap();
        let b = solve(&p, &ExactParams::default(), &crate::NoClock, &mut ()).unwrap();
        assert_eq!(a, b);
    }
}
