//! Greedy construction and alternation-preserving local search.
//!
//! Tours are handled as directed orders starting on a placeholder. The
//! closing edge `order[2n-1] -> order[0]` is never removed when the fixed
//! pair is on; without it, moves may use the closing edge as well.
//!
//! Two neighbourhoods are used:
//!
//! * 2-opt: drop two edges traversed in opposite directions (one
//!   item→placeholder, one placeholder→item) and reconnect by reversing the
//!   segment between them. Their tail nodes sit on opposite sides, so the new
//!   edges again join an item to a placeholder.
//! * Pair relocation: cut out two consecutive nodes (one item, one
//!   placeholder), close the gap, and reinsert the pair into another edge in
//!   whichever orientation keeps alternation. Moving a single node would put
//!   two nodes of the same side next to each other.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clock::Clock;
use crate::problem::{Compat, Problem};
use crate::tour::{CycleSolution, SolveStats};
use crate::{Error, Result};

const IMPROVE_EPS: f64 = 1e-12;
const SECOND_CHOICE_PROB: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub struct LocalSearchParams {
    pub restarts: usize,
    pub seed: u64,
    /// Seconds; later restarts and passes are skipped once exceeded.
    pub time_limit: f64,
    /// Double-bridge perturbations of the best tour after the restarts,
    /// each followed by a polish; kept only when they improve.
    pub kicks: usize,
}

impl Default for LocalSearchParams {
    fn default() -> Self {
        Self { restarts: 8, seed: 0, time_limit: 120.0, kicks: 0 }
    }
}

/// Nearest-neighbour tour from the start placeholder, alternating between
/// the nearest unvisited item and the nearest unvisited placeholder.
///
/// With probability 0.3 per step the second-nearest candidate is taken
/// instead (driven by `seed`). Under the fixed pair, item `n-1` is held back
/// until it is the only one left so the tour closes through `{n-1, 2n-1}`.
/// With a compatibility mask, a placeholder is only chosen for the item just
/// picked up if the remaining items can still all be delivered.
pub fn greedy_construct(problem: &Problem, seed: u64) -> Result<CycleSolution> {
    problem.check_feasible()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = build_greedy(problem, &mut rng)?;
    CycleSolution::from_order(problem, order, SolveStats::default())
}

fn build_greedy(problem: &Problem, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let n = problem.n();
    let cost = problem.cost();
    let fixed = problem.fixed_pair();
    let start_slot = if fixed { n - 1 } else { 0 };
    let last_item = fixed.then_some(n - 1);
    let mut item_used = vec![false; n];
    let mut slot_used = vec![false; n];
    slot_used[start_slot] = true;
    let mut order = Vec::with_capacity(2 * n);
    order.push(n + start_slot);
    for step in 0..n {
        let here = order[order.len() - 1] - n;
        let item = if step + 1 == n && last_item.is_some() {
            n - 1
        } else {
            let mut cands: Vec<usize> = (0..n).filter(|&i| !item_used[i] && Some(i) != last_item).collect();
            if let Some(c) = problem.compat() {
                cands.retain(|&i| {
                    item_used[i] = true;
                    let ok = (0..n).any(|p| {
                        !slot_used[p] && c.allows(i, p) && still_matchable(c, &item_used, &slot_used, p, start_slot, last_item)
                    });
                    item_used[i] = false;
                    ok
                });
            }
            if cands.is_empty() {
                return Err(Error::Infeasible);
            }
            pick(&cands, |i| cost.get(i, here), rng)
        };
        item_used[item] = true;
        order.push(item);
        if step + 1 == n {
            break;
        }
        let mut cands: Vec<usize> = (0..n).filter(|&p| !slot_used[p]).collect();
        if let Some(c) = problem.compat() {
            cands.retain(|&p| c.allows(item, p) && still_matchable(c, &item_used, &slot_used, p, start_slot, last_item));
        }
        if cands.is_empty() {
            return Err(Error::Infeasible);
        }
        let slot = pick(&cands, |p| cost.get(item, p), rng);
        slot_used[slot] = true;
        order.push(n + slot);
    }
    Ok(order)
}

fn pick(cands: &[usize], dist: impl Fn(usize) -> f64, rng: &mut ChaCha8Rng) -> usize {
    let mut best = (f64::INFINITY, usize::MAX);
    let mut second = (f64::INFINITY, usize::MAX);
    for &c in cands {
        let d = (dist(c), c);
        if d.0 < best.0 || (d.0 == best.0 && d.1 < best.1) {
            second = best;
            best = d;
        } else if d.0 < second.0 || (d.0 == second.0 && d.1 < second.1) {
            second = d;
        }
    }
    let take_second = cands.len() > 1 && rng.gen_bool(SECOND_CHOICE_PROB);
    if take_second {
        second.1
    } else {
        best.1
    }
}

/// Whether the unvisited items can still be delivered after `slot` is taken.
/// The start placeholder is delivered to last, so it stays available.
fn still_matchable(
    compat: &Compat,
    item_used: &[bool],
    slot_used: &[bool],
    slot: usize,
    start_slot: usize,
    last_item: Option<usize>,
) -> bool {
    let n = compat.n();
    let items: Vec<usize> = (0..n).filter(|&i| !item_used[i]).collect();
    let slots: Vec<usize> = (0..n).filter(|&p| (!slot_used[p] && p != slot) || p == start_slot).collect();
    if items.len() != slots.len() {
        return false;
    }
    let lists: Vec<Vec<usize>> = items
        .iter()
        .map(|&i| (0..slots.len()).filter(|&k| compat.allows(i, slots[k])).collect())
        .collect();
    let Ok(sub) = Compat::from_lists(items.len(), &lists) else { return false };
    let forced = last_item.and_then(|li| {
        let a = items.iter().position(|&i| i == li)?;
        let b = slots.iter().position(|&p| p == start_slot)?;
        Some(crate::Edge::new(a, b))
    });
    sub.has_perfect_matching(forced)
}

fn d(problem: &Problem, u: usize, v: usize) -> f64 {
    problem.cost().between(u, v)
}

/// Applies improving 2-opt moves (first improvement) until none is left.
pub fn two_opt_improve(problem: &Problem, solution: &CycleSolution) -> Result<CycleSolution> {
    let mut order = solution.order.clone();
    while two_opt_pass(problem, &mut order) {}
    CycleSolution::from_order(problem, order, solution.stats.clone())
}

/// Applies improving pair relocations (first improvement) until none is left.
pub fn relocate_improve(problem: &Problem, solution: &CycleSolution) -> Result<CycleSolution> {
    let mut order = solution.order.clone();
    while relocate_pass(problem, &mut order) {}
    CycleSolution::from_order(problem, order, solution.stats.clone())
}

/// Removable edges: `k -> k+1` for `k` in `0..limit`.
fn edge_limit(problem: &Problem, len: usize) -> usize {
    if problem.fixed_pair() {
        len - 1
    } else {
        len
    }
}

/// One sweep over all 2-opt moves; returns whether any move was applied.
fn two_opt_pass(problem: &Problem, order: &mut [usize]) -> bool {
    let len = order.len();
    let limit = edge_limit(problem, len);
    let mut improved = false;
    for k in 0..limit {
        // l - k odd keeps the tails on opposite sides; l = k + 1 is a no-op
        let mut l = k + 3;
        while l < limit {
            let a = order[k];
            let b = order[k + 1];
            let c = order[l];
            let e = order[(l + 1) % len];
            let delta = d(problem, a, c) + d(problem, b, e) - d(problem, a, b) - d(problem, c, e);
            if delta < -IMPROVE_EPS {
                order[k + 1..=l].reverse();
                if problem.respects_types(order) {
                    improved = true;
                } else {
                    order[k + 1..=l].reverse();
                }
            }
            l += 2;
        }
    }
    improved
}

/// Best improving delta of any 2-opt move; used to check local optimality.
pub fn best_two_opt_delta(problem: &Problem, order: &[usize]) -> f64 {
    let len = order.len();
    let limit = edge_limit(problem, len);
    let mut best = 0.0f64;
    let mut work = order.to_vec();
    for k in 0..limit {
        let mut l = k + 3;
        while l < limit {
            let (a, b, c, e) = (order[k], order[k + 1], order[l], order[(l + 1) % len]);
            let delta = d(problem, a, c) + d(problem, b, e) - d(problem, a, b) - d(problem, c, e);
            if delta < best {
                work[k + 1..=l].reverse();
                if problem.respects_types(&work) {
                    best = delta;
                }
                work[k + 1..=l].reverse();
            }
            l += 2;
        }
    }
    best
}

/// Cost change of moving the pair at `a, a+1` into edge `b -> b+1`.
fn relocate_delta(problem: &Problem, order: &[usize], a: usize, b: usize) -> f64 {
    let len = order.len();
    let prev = order[a - 1];
    let x = order[a];
    let y = order[a + 1];
    let next = order[(a + 2) % len];
    let u = order[b];
    let v = order[(b + 1) % len];
    let n = problem.n();
    // the pair end adjacent to u must sit on the other side from u
    let (first, second) = if (x < n) != (u < n) { (x, y) } else { (y, x) };
    d(problem, prev, next) - d(problem, prev, x) - d(problem, y, next) + d(problem, u, first) + d(problem, second, v)
        - d(problem, u, v)
}

fn apply_relocate(order: &[usize], n: usize, a: usize, b: usize) -> Vec<usize> {
    let x = order[a];
    let y = order[a + 1];
    let u = order[b];
    let (first, second) = if (x < n) != (u < n) { (x, y) } else { (y, x) };
    let mut out = Vec::with_capacity(order.len());
    for (k, &node) in order.iter().enumerate() {
        if k == a || k == a + 1 {
            continue;
        }
        out.push(node);
        if k == b {
            out.push(first);
            out.push(second);
        }
    }
    out
}

/// Pair start positions and insertion edges that keep the locked nodes put.
fn relocate_ranges(problem: &Problem, len: usize) -> (core::ops::Range<usize>, usize) {
    if problem.fixed_pair() {
        (1..len - 2, len - 1)
    } else {
        (1..len - 1, len)
    }
}

fn relocate_pass(problem: &Problem, order: &mut Vec<usize>) -> bool {
    let len = order.len();
    let n = problem.n();
    let (pairs, limit) = relocate_ranges(problem, len);
    let mut improved = false;
    for a in pairs {
        for b in 0..limit {
            if b + 1 >= a && b <= a + 1 {
                continue;
            }
            if relocate_delta(problem, order, a, b) < -IMPROVE_EPS {
                let cand = apply_relocate(order, n, a, b);
                if problem.respects_types(&cand) {
                    *order = cand;
                    improved = true;
                    break;
                }
            }
        }
    }
    improved
}

/// Best improving delta of any pair relocation; used to check local optimality.
pub fn best_relocate_delta(problem: &Problem, order: &[usize]) -> f64 {
    let len = order.len();
    let n = problem.n();
    let (pairs, limit) = relocate_ranges(problem, len);
    let mut best = 0.0f64;
    for a in pairs {
        for b in 0..limit {
            if b + 1 >= a && b <= a + 1 {
                continue;
            }
            let delta = relocate_delta(problem, order, a, b);
            if delta < best && problem.respects_types(&apply_relocate(order, n, a, b)) {
                best = delta;
            }
        }
    }
    best
}

/// Alternates full 2-opt and relocation descents until neither improves.
fn polish<C: Clock>(problem: &Problem, order: &mut Vec<usize>, clock: &C, deadline: f64) {
    loop {
        while two_opt_pass(problem, order) {
            if clock.elapsed_secs() >= deadline {
                return;
            }
        }
        let mut moved = false;
        while relocate_pass(problem, order) {
            moved = true;
            if clock.elapsed_secs() >= deadline {
                return;
            }
        }
        if !moved {
            return;
        }
    }
}

/// Cuts the order at three random even positions into `A B C D` and
/// returns `A C B D`. Every piece starts on a placeholder and ends on an
/// item, so the result alternates; the first and last node stay put.
fn double_bridge(order: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let half = order.len() / 2;
    let mut cuts = [0usize; 3];
    loop {
        for c in &mut cuts {
            *c = 2 * rng.gen_range(1..half);
        }
        cuts.sort_unstable();
        if cuts[0] < cuts[1] && cuts[1] < cuts[2] {
            break;
        }
    }
    let [a, b, c] = cuts;
    let mut out = Vec::with_capacity(order.len());
    out.extend_from_slice(&order[..a]);
    out.extend_from_slice(&order[b..c]);
    out.extend_from_slice(&order[a..b]);
    out.extend_from_slice(&order[c..]);
    out
}

/// Best of `restarts` greedy starts, each polished to a local optimum of both
/// neighbourhoods. Restart `r` starts from `greedy_construct(problem, seed + r)`.
///
/// The best tour is then perturbed `kicks` times (needs `n >= 4`).
///
/// The first greedy tour is always built. Polishing stops and further
/// restarts or kicks are skipped once `time_limit` seconds have passed on
/// `clock`.
pub fn local_search<C: Clock>(problem: &Problem, params: &LocalSearchParams, clock: &C) -> Result<CycleSolution> {
    problem.check_feasible()?;
    let start = clock.elapsed_secs();
    let deadline = start + params.time_limit;
    let mut best: Option<Vec<usize>> = None;
    let mut best_cost = f64::INFINITY;
    for r in 0..params.restarts.max(1) {
        if r > 0 && clock.elapsed_secs() >= deadline {
            break;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(r as u64));
        let mut order = build_greedy(problem, &mut rng)?;
        polish(problem, &mut order, clock, deadline);
        let c = problem.tour_cost(&order);
        if c < best_cost - IMPROVE_EPS {
            best_cost = c;
            best = Some(order);
        }
    }
    let mut order = best.ok_or(Error::Infeasible)?;
    if problem.n() >= 4 {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(params.restarts.max(1) as u64));
        for _ in 0..params.kicks {
            if clock.elapsed_secs() >= deadline {
                break;
            }
            let mut cand = double_bridge(&order, &mut rng);
            if !problem.respects_types(&cand) {
                continue;
            }
            polish(problem, &mut cand, clock, deadline);
            let c = problem.tour_cost(&cand);
            if c < best_cost - IMPROVE_EPS {
                best_cost = c;
                order = cand;
            }
        }
    }
    let mut sol = CycleSolution::from_order(problem, order, SolveStats::default())?;
    sol.stats.incumbent_cost = sol.cost;
    sol.stats.dt = clock.elapsed_secs() - start;
    Ok(sol)
}
