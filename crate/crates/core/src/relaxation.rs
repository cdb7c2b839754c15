//! Minimum-cost bipartite 2-factor under edge fixings.
//!
//! Dropping connectivity from the tour constraints leaves a transportation
//! problem: every item supplies two units, every placeholder demands two, and
//! each item–placeholder edge carries at most one. The constraint matrix is
//! totally unimodular, so successive shortest paths return an integral optimum
//! and the cost is a lower bound on any tour that respects the same fixings.
//!
//! Forced edges are pre-loaded as flow that may never be cancelled; forbidden
//! edges are simply absent from the residual network.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::instance::CostMatrix;
use crate::problem::Edge;
use crate::{Error, Result};

const NONE: u32 = u32::MAX;

/// Edges pinned to 1 (`forced`) or 0 (`forbidden`) by branching.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EdgeFixings {
    forced: Vec<Edge>,
    forbidden: Vec<Edge>,
}

impl EdgeFixings {
    pub fn new() -> Self {
        Self::default()
    }

    /// Both lists are sorted and deduplicated.
    pub fn from_parts(mut forced: Vec<Edge>, mut forbidden: Vec<Edge>) -> Self {
        forced.sort_unstable();
        forced.dedup();
        forbidden.sort_unstable();
        forbidden.dedup();
        Self { forced, forbidden }
    }

    pub fn forced(&self) -> &[Edge] {
        &self.forced
    }

    pub fn forbidden(&self) -> &[Edge] {
        &self.forbidden
    }

    pub fn is_forced(&self, e: Edge) -> bool {
        self.forced.binary_search(&e).is_ok()
    }

    pub fn is_forbidden(&self, e: Edge) -> bool {
        self.forbidden.binary_search(&e).is_ok()
    }

    pub fn force(&mut self, e: Edge) {
        if let Err(pos) = self.forced.binary_search(&e) {
            self.forced.insert(pos, e);
        }
    }

    pub fn forbid(&mut self, e: Edge) {
        if let Err(pos) = self.forbidden.binary_search(&e) {
            self.forbidden.insert(pos, e);
        }
    }

    /// Checks disjointness, index range and the two-forced-edges-per-node limit.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut item_deg = vec![0u8; n];
        let mut slot_deg = vec![0u8; n];
        for e in self.forced.iter().chain(self.forbidden.iter()) {
            if e.item >= n || e.slot >= n {
                return Err(Error::InvalidParameter(format!(
                    "fixed edge ({}, {}) out of range for n = {n}",
                    e.item, e.slot
                )));
            }
        }
        for e in &self.forced {
            if self.is_forbidden(*e) {
                return Err(Error::InvalidParameter(format!(
                    "edge ({}, {}) both forced and forbidden",
                    e.item, e.slot
                )));
            }
            item_deg[e.item] += 1;
            slot_deg[e.slot] += 1;
        }
        if let Some(i) = item_deg.iter().position(|d| *d > 2) {
            return Err(Error::InvalidParameter(format!("item {i} has more than two forced edges")));
        }
        if let Some(p) = slot_deg.iter().position(|d| *d > 2) {
            return Err(Error::InvalidParameter(format!("placeholder {p} has more than two forced edges")));
        }
        Ok(())
    }

    /// Dense per-edge status: 0 free, 1 forced, 2 forbidden.
    pub(crate) fn mask(&self, n: usize) -> Vec<u8> {
        let mut m = vec![FREE; n * n];
        for e in &self.forced {
            m[e.item * n + e.slot] = FORCED;
        }
        for e in &self.forbidden {
            m[e.item * n + e.slot] = FORBIDDEN;
        }
        m
    }
}

pub(crate) const FREE: u8 = 0;
pub(crate) const FORCED: u8 = 1;
pub(crate) const FORBIDDEN: u8 = 2;

/// A 2-factor of the complete bipartite graph: every node has degree two.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoFactor {
    pub edges: Vec<Edge>,
    pub cost: f64,
}

/// Cost-minimal 2-factor respecting `fixings`, or [`Error::Infeasible`].
pub fn min_cost_two_factor(cost: &CostMatrix, fixings: &EdgeFixings) -> Result<TwoFactor> {
    fixings.validate(cost.n())?;
    let mask = fixings.mask(cost.n());
    let state = FlowState::solve(cost, &mask).ok_or(Error::Infeasible)?;
    Ok(TwoFactor { edges: state.edges(), cost: state.cost })
}

/// Relaxation value under `fixings`; `+inf` when no 2-factor exists.
pub fn lower_bound(cost: &CostMatrix, fixings: &EdgeFixings) -> f64 {
    match min_cost_two_factor(cost, fixings) {
        Ok(tf) => tf.cost,
        Err(_) => f64::INFINITY,
    }
}

/// Optimal flow plus node potentials, enough to re-optimise after one more
/// chosen edge is forbidden.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct FlowState {
    /// The two placeholders matched to each item.
    mates: Vec<[u32; 2]>,
    /// Dual potentials: items `0..n`, placeholders `n..2n`.
    potential: Vec<f64>,
    pub(crate) cost: f64,
}

impl FlowState {
    pub(crate) fn n(&self) -> usize {
        self.mates.len()
    }

    pub(crate) fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(2 * self.n());
        for (i, m) in self.mates.iter().enumerate() {
            let (a, b) = if m[0] <= m[1] { (m[0], m[1]) } else { (m[1], m[0]) };
            out.push(Edge::new(i, a as usize));
            out.push(Edge::new(i, b as usize));
        }
        out
    }

    fn from_flow(cost: &CostMatrix, flow: &[bool], potential: Vec<f64>) -> Self {
        let n = cost.n();
        let mut mates = vec![[NONE; 2]; n];
        let mut total = 0.0;
        for i in 0..n {
            let mut k = 0;
            for p in 0..n {
                if flow[i * n + p] {
                    mates[i][k] = p as u32;
                    k += 1;
                    total += cost.get(i, p);
                }
            }
            debug_assert_eq!(k, 2);
        }
        Self { mates, potential, cost: total }
    }

    /// Successive shortest paths from a super source over items to a super
    /// sink behind the placeholders.
    pub(crate) fn solve(cost: &CostMatrix, mask: &[u8]) -> Option<Self> {
        let n = cost.n();
        let s = 2 * n;
        let t = 2 * n + 1;
        let nodes = 2 * n + 2;
        let mut flow = vec![false; n * n];
        let mut supply = vec![2i32; n];
        let mut demand = vec![2i32; n];
        for i in 0..n {
            for p in 0..n {
                if mask[i * n + p] == FORCED {
                    flow[i * n + p] = true;
                    supply[i] -= 1;
                    demand[p] -= 1;
                }
            }
        }
        if supply.iter().chain(demand.iter()).any(|x| *x < 0) {
            return None;
        }
        let needed: i32 = supply.iter().sum();
        let mut pot = vec![0.0f64; nodes];
        let mut dist = vec![f64::INFINITY; nodes];
        let mut done = vec![false; nodes];
        let mut parent = vec![usize::MAX; nodes];

        for _ in 0..needed {
            dist.fill(f64::INFINITY);
            done.fill(false);
            parent.fill(usize::MAX);
            dist[s] = 0.0;
            loop {
                let mut u = usize::MAX;
                let mut best = f64::INFINITY;
                for v in 0..nodes {
                    if !done[v] && dist[v] < best {
                        best = dist[v];
                        u = v;
                    }
                }
                if u == usize::MAX || u == t {
                    break;
                }
                done[u] = true;
                let relax = |v: usize, c: f64, dist: &mut [f64], parent: &mut [usize]| {
                    let rc = reduced(c, pot[u], pot[v]);
                    let nd = best + rc;
                    if nd < dist[v] {
                        dist[v] = nd;
                        parent[v] = u;
                    }
                };
                if u == s {
                    for i in 0..n {
                        if supply[i] > 0 && !done[i] {
                            relax(i, 0.0, &mut dist, &mut parent);
                        }
                    }
                } else if u < n {
                    let row = cost.row(u);
                    for p in 0..n {
                        let k = u * n + p;
                        if !flow[k] && mask[k] == FREE && !done[n + p] {
                            relax(n + p, row[p], &mut dist, &mut parent);
                        }
                    }
                } else if u < 2 * n {
                    let p = u - n;
                    for i in 0..n {
                        let k = i * n + p;
                        if flow[k] && mask[k] == FREE && !done[i] {
                            relax(i, -cost.get(i, p), &mut dist, &mut parent);
                        }
                    }
                    if demand[p] > 0 && !done[t] {
                        relax(t, 0.0, &mut dist, &mut parent);
                    }
                }
            }
            let dt = dist[t];
            if !dt.is_finite() {
                return None;
            }
            for v in 0..nodes {
                pot[v] += if done[v] { dist[v] } else { dt };
            }
            let mut v = t;
            while v != s {
                let u = parent[v];
                if u == s {
                    supply[v] -= 1;
                } else if v == t {
                    demand[u - n] -= 1;
                } else if u < n {
                    flow[u * n + (v - n)] = true;
                } else {
                    flow[v * n + (u - n)] = false;
                }
                v = u;
            }
        }
        pot.truncate(2 * n);
        Some(Self::from_flow(cost, &flow, pot))
    }

    /// Re-optimises after forbidding `dropped`, an edge of the current flow.
    ///
    /// `mask` is the child's full fixing mask (it already marks `dropped` as
    /// forbidden). Removing arcs keeps the stored potentials dual feasible, so
    /// one Dijkstra pass from the dropped edge's item to its placeholder
    /// restores a min-cost 2-factor.
    pub(crate) fn repair(&self, cost: &CostMatrix, mask: &[u8], dropped: Edge) -> Option<Self> {
        let n = cost.n();
        let mut mates = self.mates.clone();
        {
            let m = &mut mates[dropped.item];
            let k = m.iter().position(|p| *p as usize == dropped.slot)?;
            m[k] = NONE;
        }
        let mut slot_mates = vec![[NONE; 2]; n];
        for (i, m) in mates.iter().enumerate() {
            for &p in m {
                if p != NONE {
                    let sm = &mut slot_mates[p as usize];
                    let k = if sm[0] == NONE { 0 } else { 1 };
                    sm[k] = i as u32;
                }
            }
        }
        let pot = &self.potential;
        let src = dropped.item;
        let dst = n + dropped.slot;
        let nodes = 2 * n;
        let mut dist = vec![f64::INFINITY; nodes];
        let mut done = vec![false; nodes];
        let mut parent = vec![usize::MAX; nodes];
        let mut heap = BinaryHeap::new();
        dist[src] = 0.0;
        heap.push(Queued(0.0, src));
        while let Some(Queued(du, u)) = heap.pop() {
            if done[u] || du > dist[u] {
                continue;
            }
            done[u] = true;
            if u == dst {
                break;
            }
            if u < n {
                let row = cost.row(u);
                let m = mates[u];
                for p in 0..n {
                    let v = n + p;
                    if mask[u * n + p] != FREE || done[v] || m[0] as usize == p || m[1] as usize == p {
                        continue;
                    }
                    let nd = du + reduced(row[p], pot[u], pot[v]);
                    if nd < dist[v] {
                        dist[v] = nd;
                        parent[v] = u;
                        heap.push(Queued(nd, v));
                    }
                }
            } else {
                let p = u - n;
                for &i in &slot_mates[p] {
                    if i == NONE {
                        continue;
                    }
                    let i = i as usize;
                    if mask[i * n + p] != FREE || done[i] {
                        continue;
                    }
                    let nd = du + reduced(-cost.get(i, p), pot[u], pot[i]);
                    if nd < dist[i] {
                        dist[i] = nd;
                        parent[i] = u;
                        heap.push(Queued(nd, i));
                    }
                }
            }
        }
        if !done[dst] {
            return None;
        }
        let dt = dist[dst];
        let mut potential = pot.clone();
        for v in 0..nodes {
            potential[v] += if done[v] { dist[v] } else { dt };
        }
        let mut path = Vec::new();
        let mut v = dst;
        while v != src {
            path.push((parent[v], v));
            v = parent[v];
        }
        // cancel reverse arcs first so every item has a free mate slot
        for &(u, v) in path.iter().filter(|(u, _)| *u >= n) {
            let m = &mut mates[v];
            let k = if m[0] as usize == u - n { 0 } else { 1 };
            m[k] = NONE;
        }
        for &(u, v) in path.iter().filter(|(u, _)| *u < n) {
            let m = &mut mates[u];
            let k = if m[0] == NONE { 0 } else { 1 };
            m[k] = (v - n) as u32;
        }
        let mut total = 0.0;
        for (i, m) in mates.iter_mut().enumerate() {
            if m[0] > m[1] {
                m.swap(0, 1);
            }
            total += cost.get(i, m[0] as usize) + cost.get(i, m[1] as usize);
        }
        Some(Self { mates, potential, cost: total })
    }
}

/// Heap entry ordered so the smallest distance pops first.
struct Queued(f64, usize);

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

#[inline]
fn reduced(c: f64, pu: f64, pv: f64) -> f64 {
    let rc = c + pu - pv;
    debug_assert!(rc > -1e-6, "negative reduced cost {rc}");
    if rc < 0.0 {
        0.0
    } else {
        rc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Instance, Point};

    fn unit_cross() -> CostMatrix {
        Instance::new(
            1,
            vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0)],
            vec![Point::new(1.0, 0.0), Point::new(0.0, 1.0)],
        )
        .unwrap()
        .cost_matrix()
    }

    #[test]
    fn k22_uses_every_edge() {
        let c = unit_cross();
        let tf = min_cost_two_factor(&c, &EdgeFixings::new()).unwrap();
        assert_eq!(tf.edges.len(), 4);
        assert!((tf.cost - 4.0).abs() < 1e-12);
    }

    #[test]
    fn forbidding_an_edge_at_n2_is_infeasible() {
        let c = unit_cross();
        let f = EdgeFixings::from_parts(vec![], vec![Edge::new(0, 0)]);
        assert_eq!(min_cost_two_factor(&c, &f), Err(Error::Infeasible));
        assert_eq!(lower_bound(&c, &f), f64::INFINITY);
    }

    #[test]
    fn invalid_fixings_are_rejected() {
        let c = unit_cross();
        let both = EdgeFixings::from_parts(vec![Edge::new(0, 0)], vec![Edge::new(0, 0)]);
        assert!(matches!(min_cost_two_factor(&c, &both), Err(Error::InvalidParameter(_))));
        let cm = CostMatrix::from_rows(3, vec![1.0; 9]).unwrap();
        let three = EdgeFixings::from_parts(vec![Edge::new(0, 0), Edge::new(0, 1), Edge::new(0, 2)], vec![]);
        assert!(matches!(min_cost_two_factor(&cm, &three), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn repair_matches_fresh_solve() {
        let inst = crate::instance::generate(6, 1, 3).unwrap().remove(&1000).unwrap();
        let c = inst.cost_matrix();
        let root = FlowState::solve(&c, &EdgeFixings::new().mask(6)).unwrap();
        for e in root.edges() {
            let f = EdgeFixings::from_parts(vec![], vec![e]);
            let fresh = FlowState::solve(&c, &f.mask(6));
            let fixed = root.repair(&c, &f.mask(6), e);
            match (fresh, fixed) {
                (Some(a), Some(b)) => assert!((a.cost - b.cost).abs() < 1e-9),
                (None, None) => {}
                other => panic!("mismatch {other:?}"),
            }
        }
    }
}
