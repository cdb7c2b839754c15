use altour_core::exact::{self, expand, root_node, ExactParams, Expansion, Monitor};
use altour_core::heuristics::{best_relocate_delta, best_two_opt_delta, greedy_construct, local_search, LocalSearchParams};
use altour_core::instance::generate;
use altour_core::model::validate_solution;
use altour_core::oracle::{brute_force_optimum, enumerate_tours};
use altour_core::relaxation::EdgeFixings;
use altour_core::{Instance, NoClock, Point, Problem};
use proptest::prelude::*;

fn instance(n: usize, seed: u64, fixed: bool) -> Instance {
    generate(n, 1, seed).unwrap().remove(&1000).unwrap().with_fixed_pair(fixed)
}

fn arb_instance(max_n: usize) -> impl Strategy<Value = Instance> {
    (2..=max_n, any::<u64>(), any::<bool>()).prop_map(|(n, seed, fixed)| instance(n, seed, fixed))
}

/// Clustered and collinear points: many ties and degenerate 2-factors.
fn arb_lattice(max_n: usize) -> impl Strategy<Value = Instance> {
    (2..=max_n).prop_flat_map(|n| {
        (prop::collection::vec((0u8..3, 0u8..3), 2 * n), any::<bool>()).prop_map(move |(pts, fixed)| {
            let p: Vec<Point> = pts.iter().map(|(x, y)| Point::new(f64::from(*x), f64::from(*y))).collect();
            Instance::new(1, p[..n].to_vec(), p[n..].to_vec()).unwrap().with_fixed_pair(fixed)
        })
    })
}

#[derive(Default)]
struct Audit {
    nodes: Vec<(EdgeFixings, f64)>,
    incumbents: Vec<f64>,
}

impl Monitor for Audit {
    fn on_node(&mut self, fixings: &EdgeFixings, bound: f64) {
        self.nodes.push((fixings.clone(), bound));
    }
    fn on_incumbent(&mut self, cost: f64) {
        self.incumbents.push(cost);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_equals_oracle(inst in arb_instance(6)) {
        let p = Problem::from_instance(&inst);
        let a = exact::solve(&p, &ExactParams::default(), &NoClock, &mut ()).unwrap();
        let b = brute_force_optimum(&p).unwrap();
        prop_assert!((a.cost - b.cost).abs() <= 1e-9, "{} vs {}", a.cost, b.cost);
        prop_assert!(validate_solution(&p, &a).passed());
        prop_assert!(a.stats.best_bound <= a.cost + 1e-9 && a.cost - a.stats.best_bound <= 1e-9);
    }

    #[test]
    fn exact_equals_oracle_on_ties(inst in arb_lattice(5)) {
        let p = Problem::from_instance(&inst);
        let params = ExactParams { heuristic_restarts: 0, ..ExactParams::default() };
        let a = exact::solve(&p, &params, &NoClock, &mut ()).unwrap();
        let b = brute_force_optimum(&p).unwrap();
        prop_assert!((a.cost - b.cost).abs() <= 1e-9);
        prop_assert!(validate_solution(&p, &a).passed());
    }

    /// Every expanded node's bound is at most the cheapest tour under its
    /// fixings, and the incumbent only ever improves.
    #[test]
    fn bound_sandwich(inst in arb_instance(4)) {
        let p = Problem::from_instance(&inst);
        let tours: Vec<_> = enumerate_tours(p.n(), p.fixed_pair()).unwrap().collect();
        let mut audit = Audit::default();
        let params = ExactParams { heuristic_restarts: 0, ..ExactParams::default() };
        exact::solve(&p, &params, &NoClock, &mut audit).unwrap();
        for (f, bound) in &audit.nodes {
            let best = tours
                .iter()
                .filter(|t| f.forced().iter().all(|e| t.contains(e)) && f.forbidden().iter().all(|e| !t.contains(e)))
                .map(|t| p.edge_cost(t))
                .fold(f64::INFINITY, f64::min);
            prop_assert!(*bound <= best + 1e-9, "bound {bound} above {best}");
        }
        prop_assert!(audit.incumbents.windows(2).all(|w| w[1] <= w[0]));
    }

    /// Following random children from the root, bounds never decrease.
    #[test]
    fn bound_monotone_along_paths(inst in arb_instance(8), picks in prop::collection::vec(any::<prop::sample::Index>(), 16)) {
        let p = Problem::from_instance(&inst);
        let mut node = root_node(&p).unwrap();
        for pick in picks {
            let parent = node.bound();
            match expand(&p, node, f64::INFINITY, f64::INFINITY, &mut ()) {
                Expansion::Branched(kids) => {
                    let k = pick.index(kids.len());
                    let Some(child) = kids.into_iter().nth(k).and_then(|c| exact::evaluate(&p, c)) else { break };
                    prop_assert!(child.bound() >= parent - 1e-9);
                    node = child;
                }
                _ => break,
            }
        }
    }

    #[test]
    fn heuristics_are_valid(inst in arb_instance(12), seed in any::<u64>()) {
        let p = Problem::from_instance(&inst);
        let g = greedy_construct(&p, seed).unwrap();
        prop_assert!(validate_solution(&p, &g).passed());
        let ls = local_search(&p, &LocalSearchParams { seed, restarts: 2, ..LocalSearchParams::default() }, &NoClock).unwrap();
        prop_assert!(validate_solution(&p, &ls).passed());
        prop_assert!(best_two_opt_delta(&p, &ls.order) >= -1e-9);
        prop_assert!(best_relocate_delta(&p, &ls.order) >= -1e-9);
        if p.n() <= 6 {
            prop_assert!(ls.cost >= brute_force_optimum(&p).unwrap().cost - 1e-9);
        }
    }
}
