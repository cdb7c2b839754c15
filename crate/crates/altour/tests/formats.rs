use altour::dataset::{read_csv, write_csv, Dataset};
use altour::results::{read_results, write_results, ResultRow, Status};
use altour_core::{Instance, Point};
use proptest::prelude::*;

fn arb_dataset() -> impl Strategy<Value = Dataset> {
    prop::collection::btree_map(
        0u64..5000,
        (2usize..7).prop_flat_map(|n| prop::collection::vec((0u32..1_000_000, 0u32..1_000_000), 2 * n)),
        1..4,
    )
    .prop_map(|groups| {
        groups
            .into_iter()
            .map(|(id, ks)| {
                let pts: Vec<Point> =
                    ks.iter().map(|(x, y)| Point::new(f64::from(*x) / 1e6, f64::from(*y) / 1e6)).collect();
                let n = pts.len() / 2;
                (id, Instance::new(id, pts[..n].to_vec(), pts[n..].to_vec()).unwrap())
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn dataset_round_trip_is_byte_identical(data in arb_dataset()) {
        let mut a = Vec::new();
        write_csv(&data, &mut a).unwrap();
        let back = read_csv(&a[..]).unwrap();
        let mut b = Vec::new();
        write_csv(&back, &mut b).unwrap();
        prop_assert_eq!(a, b);
        prop_assert_eq!(back.len(), data.len());
    }

    #[test]
    fn result_rows_round_trip(id in any::<u32>(), cost in 0.0f64..1e4, dt in 0.0f64..1e3, k in 1usize..6) {
        let assignment: Vec<(usize, usize)> = (0..k).map(|i| (i, k + (i + 1) % k)).collect();
        let edges: Vec<(usize, usize)> = (0..2 * k).map(|i| (i, (i + 1) % (2 * k))).collect();
        let row = ResultRow { experiment_id: u64::from(id), best_cost: Some(cost), dt, assignment, edges, status: Status::Timeout };
        let mut buf = Vec::new();
        write_results(std::slice::from_ref(&row), &mut buf).unwrap();
        let back = read_results(&buf[..]).unwrap();
        prop_assert_eq!(back.len(), 1);
        prop_assert_eq!(&back[0].edges, &row.edges);
        prop_assert_eq!(&back[0].assignment, &row.assignment);
        prop_assert!((back[0].best_cost.unwrap() - cost).abs() <= 5e-5);
        prop_assert_eq!(back[0].status, Status::Timeout);
    }
}
