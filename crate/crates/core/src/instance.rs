//! Problem instances, node indexing and Euclidean costs.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Experiment id assigned to the first generated instance.
pub const FIRST_EXPERIMENT_ID: u64 = 1000;

/// Resolution of generated coordinates; matches the 6-decimal dataset files.
const GRID: u32 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn distance(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        libm::sqrt(dx * dx + dy * dy)
    }
}

/// Type labels for every item and placeholder, in index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeTypes {
    pub items: Vec<String>,
    pub placeholders: Vec<String>,
}

impl NodeTypes {
    /// Every node carries the same label.
    pub fn uniform(n: usize, label: &str) -> Self {
        Self {
            items: (0..n).map(|_| String::from(label)).collect(),
            placeholders: (0..n).map(|_| String::from(label)).collect(),
        }
    }
}

/// One pick-and-place problem: `n` items and `n` placeholders in the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    experiment_id: u64,
    items: Vec<Point>,
    placeholders: Vec<Point>,
    types: Option<NodeTypes>,
    fixed_pair: bool,
}

impl Instance {
    /// Builds an instance with the start/goal convention enabled.
    pub fn new(experiment_id: u64, items: Vec<Point>, placeholders: Vec<Point>) -> Result<Self> {
        if items.len() != placeholders.len() {
            return Err(Error::InvalidInstance(format!(
                "experiment {experiment_id}: {} items but {} placeholders",
                items.len(),
                placeholders.len()
            )));
        }
        if items.len() < 2 {
            return Err(Error::InvalidInstance(format!(
                "experiment {experiment_id}: n = {} but at least 2 pairs are required",
                items.len()
            )));
        }
        if let Some(bad) = items
            .iter()
            .chain(placeholders.iter())
            .find(|p| !p.x.is_finite() || !p.y.is_finite())
        {
            return Err(Error::InvalidInstance(format!(
                "experiment {experiment_id}: non-finite coordinate ({}, {})",
                bad.x, bad.y
            )));
        }
        Ok(Self {
            experiment_id,
            items,
            placeholders,
            types: None,
            fixed_pair: true,
        })
    }

    pub fn with_fixed_pair(mut self, fixed_pair: bool) -> Self {
        self.fixed_pair = fixed_pair;
        self
    }

    /// Attaches type labels. Item and placeholder label multisets must agree.
    pub fn with_types(mut self, types: NodeTypes) -> Result<Self> {
        let n = self.n();
        if types.items.len() != n || types.placeholders.len() != n {
            return Err(Error::InvalidInstance(format!(
                "experiment {}: type labels cover {} items and {} placeholders, expected {n}",
                self.experiment_id,
                types.items.len(),
                types.placeholders.len()
            )));
        }
        let mut balance: BTreeMap<&str, i64> = BTreeMap::new();
        for t in &types.items {
            *balance.entry(t.as_str()).or_default() += 1;
        }
        for t in &types.placeholders {
            *balance.entry(t.as_str()).or_default() -= 1;
        }
        if let Some((label, diff)) = balance.iter().find(|(_, d)| **d != 0) {
            return Err(Error::InvalidInstance(format!(
                "experiment {}: type `{label}` has {diff:+} more items than placeholders",
                self.experiment_id
            )));
        }
        self.types = Some(types);
        Ok(self)
    }

    pub fn without_types(mut self) -> Self {
        self.types = None;
        self
    }

    pub fn experiment_id(&self) -> u64 {
        self.experiment_id
    }

    pub fn n(&self) -> usize {
        self.items.len()
    }

    pub fn items(&self) -> &[Point] {
        &self.items
    }

    pub fn placeholders(&self) -> &[Point] {
        &self.placeholders
    }

    pub fn types(&self) -> Option<&NodeTypes> {
        self.types.as_ref()
    }

    pub fn fixed_pair(&self) -> bool {
        self.fixed_pair
    }

    /// Position of a node given its global id.
    pub fn point(&self, node: usize) -> Point {
        let n = self.n();
        if node < n {
            self.items[node]
        } else {
            self.placeholders[node - n]
        }
    }

    pub fn cost_matrix(&self) -> CostMatrix {
        CostMatrix::from_points(&self.items, &self.placeholders)
    }
}

/// `d[i][p]`: Euclidean distance from item `i` to placeholder `p` (local index).
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n: usize,
    d: Vec<f64>,
}

impl CostMatrix {
    pub fn from_points(items: &[Point], placeholders: &[Point]) -> Self {
        let n = items.len();
        debug_assert_eq!(n, placeholders.len());
        let mut d = Vec::with_capacity(n * n);
        for item in items {
            for slot in placeholders {
                d.push(item.distance(slot));
            }
        }
        Self { n, d }
    }

    /// Builds a matrix from row-major entries; entries must be finite and non-negative.
    pub fn from_rows(n: usize, d: Vec<f64>) -> Result<Self> {
        if d.len() != n * n {
            return Err(Error::InvalidInstance(format!(
                "cost matrix has {} entries, expected {}",
                d.len(),
                n * n
            )));
        }
        if let Some(bad) = d.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::InvalidInstance(format!("cost entry {bad} is not a finite non-negative value")));
        }
        Ok(Self { n, d })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Cost of item `i` to placeholder `p`, both local indices.
    #[inline]
    pub fn get(&self, i: usize, p: usize) -> f64 {
        self.d[i * self.n + p]
    }

    /// Cost between two global node ids on opposite sides, in either order.
    #[inline]
    pub fn between(&self, u: usize, v: usize) -> f64 {
        let n = self.n;
        if u < n {
            debug_assert!(v >= n);
            self.get(u, v - n)
        } else {
            debug_assert!(v < n);
            self.get(v, u - n)
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }
}

/// Draws `count` instances of size `n` with coordinates uniform on a
/// `1e-6` grid in `[0, 1)`. Ids start at 1000.
pub fn generate(n: usize, count: usize, seed: u64) -> Result<BTreeMap<u64, Instance>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    if count < 1 {
        return Err(Error::InvalidParameter(String::from("count must be at least 1")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || f64::from(rng.gen_range(0..GRID)) / f64::from(GRID);
    let mut out = BTreeMap::new();
    for k in 0..count {
        let mut items = Vec::with_capacity(n);
        let mut slots = Vec::with_capacity(n);
        for _ in 0..n {
            let (px, py, tx, ty) = (draw(), draw(), draw(), draw());
            items.push(Point::new(px, py));
            slots.push(Point::new(tx, ty));
        }
        let id = FIRST_EXPERIMENT_ID + k as u64;
        out.insert(id, Instance::new(id, items, slots)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn table_one() -> Instance {
        Instance::new(
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
        .unwrap()
    }

    #[test]
    fn cost_of_first_pair() {
        let c = table_one().cost_matrix();
        let dx: f64 = 0.521386 - 0.974764;
        let dy: f64 = 0.603842 - 0.153932;
        assert_eq!(c.get(0, 0), (dx * dx + dy * dy).sqrt());
        assert!((c.get(0, 0) - 0.6387).abs() < 1e-4);
    }

    #[test]
    fn classic_triangle_and_coincident_points() {
        let inst = Instance::new(
            1,
            vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0)],
            vec![Point::new(3.0, 4.0), Point::new(1.0, 1.0)],
        )
        .unwrap();
        let c = inst.cost_matrix();
        assert_eq!(c.get(0, 0), 5.0);
        assert_eq!(c.get(1, 1), 0.0);
        assert_eq!(c.between(3, 1), 0.0);
        assert_eq!(c.between(0, 2), 5.0);
    }

    #[test]
    fn rejects_small_or_unbalanced() {
        assert!(Instance::new(1, vec![Point::default()], vec![Point::default()]).is_err());
        assert!(Instance::new(1, vec![Point::default(); 3], vec![Point::default(); 2]).is_err());
    }

    #[test]
    fn type_labels_must_balance() {
        let inst = table_one();
        let bad = NodeTypes {
            items: vec!["a".into(), "a".into(), "b".into()],
            placeholders: vec!["a".into(), "b".into(), "b".into()],
        };
        assert!(matches!(inst.clone().with_types(bad), Err(Error::InvalidInstance(_))));
        let good = NodeTypes {
            items: vec!["a".into(), "b".into(), "b".into()],
            placeholders: vec!["b".into(), "a".into(), "b".into()],
        };
        assert!(inst.with_types(good).is_ok());
    }

    #[test]
    fn generate_is_deterministic_and_in_range() {
        let a = generate(3, 2, 7).unwrap();
        assert_eq!(a.keys().copied().collect::<Vec<_>>(), vec![1000, 1001]);
        for inst in a.values() {
            for p in inst.items().iter().chain(inst.placeholders()) {
                assert!((0.0..1.0).contains(&p.x) && (0.0..1.0).contains(&p.y));
            }
        }
        assert_eq!(generate(3, 1, 7).unwrap(), generate(3, 1, 7).unwrap());
        assert_ne!(generate(3, 1, 7).unwrap(), generate(3, 1, 8).unwrap());
        assert!(matches!(generate(1, 1, 7), Err(Error::InvalidParameter(_))));
    }
}
