//! The solver-facing view of an instance: costs, the fixed-pair flag and an
//! optional delivery-compatibility mask.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::instance::{CostMatrix, Instance, NodeTypes};
use crate::{Error, Result};

/// An undirected item–placeholder edge, stored with local indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub item: usize,
    pub slot: usize,
}

impl Edge {
    pub const fn new(item: usize, slot: usize) -> Self {
        Self { item, slot }
    }

    /// Global node ids `(item, n + slot)`.
    pub const fn nodes(self, n: usize) -> (usize, usize) {
        (self.item, n + self.slot)
    }

    /// Edge joining two global node ids, if they lie on opposite sides.
    pub fn from_nodes(n: usize, u: usize, v: usize) -> Option<Self> {
        match (u < n, v < n) {
            (true, false) if v < 2 * n => Some(Self::new(u, v - n)),
            (false, true) if u < 2 * n => Some(Self::new(v, u - n)),
            _ => None,
        }
    }
}

/// Which placeholders may receive which item.
///
/// Only delivery legs (item to the placeholder visited right after it) are
/// restricted; the agent may travel empty from any placeholder to any item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Compat {
    n: usize,
    allowed: Vec<bool>,
}

impl Compat {
    pub fn all(n: usize) -> Self {
        Self { n, allowed: vec![true; n * n] }
    }

    /// Item `i` may go to placeholder `p` iff their labels match.
    pub fn from_types(types: &NodeTypes) -> Self {
        let n = types.items.len();
        let mut allowed = Vec::with_capacity(n * n);
        for it in &types.items {
            for pt in &types.placeholders {
                allowed.push(it == pt);
            }
        }
        Self { n, allowed }
    }

    /// `lists[i]` holds the local placeholder indices item `i` may go to.
    pub fn from_lists(n: usize, lists: &[Vec<usize>]) -> Result<Self> {
        if lists.len() != n {
            return Err(Error::InvalidCompat(format!("{} item lists for n = {n}", lists.len())));
        }
        let mut allowed = vec![false; n * n];
        for (i, list) in lists.iter().enumerate() {
            for &p in list {
                if p >= n {
                    return Err(Error::InvalidCompat(format!("item {i} lists placeholder {p} >= n")));
                }
                allowed[i * n + p] = true;
            }
        }
        Ok(Self { n, allowed })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn allows(&self, item: usize, slot: usize) -> bool {
        self.allowed[item * self.n + slot]
    }

    pub fn is_trivial(&self) -> bool {
        self.allowed.iter().all(|a| *a)
    }

    /// Whether a perfect item→placeholder matching exists inside the mask,
    /// optionally required to contain `forced`.
    pub fn has_perfect_matching(&self, forced: Option<Edge>) -> bool {
        let n = self.n;
        let mut slot_of_item: Vec<Option<usize>> = vec![None; n];
        let mut item_of_slot: Vec<Option<usize>> = vec![None; n];
        if let Some(e) = forced {
            if !self.allows(e.item, e.slot) {
                return false;
            }
            slot_of_item[e.item] = Some(e.slot);
            item_of_slot[e.slot] = Some(e.item);
        }
        for i in 0..n {
            if slot_of_item[i].is_some() {
                continue;
            }
            let mut seen = vec![false; n];
            if !self.augment(i, &mut seen, &mut slot_of_item, &mut item_of_slot, forced) {
                return false;
            }
        }
        true
    }

    fn augment(
        &self,
        i: usize,
        seen: &mut [bool],
        slot_of_item: &mut [Option<usize>],
        item_of_slot: &mut [Option<usize>],
        forced: Option<Edge>,
    ) -> bool {
        for p in 0..self.n {
            if !self.allows(i, p) || seen[p] {
                continue;
            }
            if forced.is_some_and(|e| e.slot == p) {
                continue;
            }
            seen[p] = true;
            let free = match item_of_slot[p] {
                None => true,
                Some(j) => self.augment(j, seen, slot_of_item, item_of_slot, forced),
            };
            if free {
                slot_of_item[i] = Some(p);
                item_of_slot[p] = Some(i);
                return true;
            }
        }
        false
    }
}

/// Costs plus side constraints; everything the search algorithms read.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    cost: CostMatrix,
    fixed_pair: bool,
    compat: Option<Compat>,
}

impl Problem {
    pub fn new(cost: CostMatrix, fixed_pair: bool, compat: Option<Compat>) -> Result<Self> {
        let n = cost.n();
        if n < 2 {
            return Err(Error::InvalidInstance(format!("n = {n}, at least 2 pairs required")));
        }
        if let Some(c) = &compat {
            if c.n() != n {
                return Err(Error::InvalidCompat(format!("mask for n = {} used with n = {n}", c.n())));
            }
        }
        let compat = compat.filter(|c| !c.is_trivial());
        Ok(Self { cost, fixed_pair, compat })
    }

    /// Costs and fixed-pair flag of the instance; type labels, when present,
    /// become the compatibility mask.
    pub fn from_instance(instance: &Instance) -> Self {
        let compat = instance.types().map(Compat::from_types).filter(|c| !c.is_trivial());
        Self {
            cost: instance.cost_matrix(),
            fixed_pair: instance.fixed_pair(),
            compat,
        }
    }

    pub fn n(&self) -> usize {
        self.cost.n()
    }

    pub fn cost(&self) -> &CostMatrix {
        &self.cost
    }

    pub fn fixed_pair(&self) -> bool {
        self.fixed_pair
    }

    pub fn compat(&self) -> Option<&Compat> {
        self.compat.as_ref()
    }

    /// The start/goal edge `{n-1, 2n-1}` when the fixed-pair convention is on.
    pub fn locked_edge(&self) -> Option<Edge> {
        self.fixed_pair.then(|| Edge::new(self.n() - 1, self.n() - 1))
    }

    /// Sum of consecutive distances along `order`, closing edge included.
    pub fn tour_cost(&self, order: &[usize]) -> f64 {
        let len = order.len();
        (0..len)
            .map(|k| self.cost.between(order[k], order[(k + 1) % len]))
            .sum()
    }

    pub fn edge_cost(&self, edges: &[Edge]) -> f64 {
        edges.iter().map(|e| self.cost.get(e.item, e.slot)).sum()
    }

    /// Whether every delivery leg of the directed `order` is compatible.
    pub fn respects_types(&self, order: &[usize]) -> bool {
        let Some(c) = &self.compat else { return true };
        let n = self.n();
        let len = order.len();
        (0..len).all(|k| {
            let u = order[k];
            let v = order[(k + 1) % len];
            u >= n || v < n || c.allows(u, v - n)
        })
    }

    /// Rejects masks under which no type-respecting tour exists.
    pub fn check_feasible(&self) -> Result<()> {
        if let Some(c) = &self.compat {
            if !c.has_perfect_matching(self.locked_edge()) {
                return Err(Error::Infeasible);
            }
        }
        Ok(())
    }
}
