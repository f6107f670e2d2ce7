use std::sync::{Arc, Mutex};

use itertools::Itertools;
use ringpoints::cliquegraph::{i_of, ValueOptions};
use ringpoints::geometry::is_collinear;
use ringpoints::orderly::{max_cardinality, max_cardinality_with, OrderlyOptions, PointSetRecord, PositionMode};

#[test]
fn unconstrained_generation_matches_clique_search() {
    for n in 1..=9u32 {
        let orderly = max_cardinality(n, PositionMode::Any).unwrap();
        let clique = i_of(n, 2, &ValueOptions::default()).unwrap().value;
        assert_eq!(orderly, clique, "n={n}");
    }
}

#[test]
fn prime_sized_sets_are_lines() {
    for p in [7u32, 11] {
        let top: Arc<Mutex<Vec<PointSetRecord>>> = Arc::default();
        let sink = top.clone();
        let opts = OrderlyOptions {
            on_group: Some(Arc::new(move |group: &[PointSetRecord]| {
                if group[0].order() == p as usize {
                    sink.lock().unwrap().extend_from_slice(group);
                }
            })),
            ..OrderlyOptions::default()
        };
        let report = max_cardinality_with(p, PositionMode::Any, &opts).unwrap();
        assert_eq!(report.value, p as u64);
        let top = top.lock().unwrap();
        assert!(!top.is_empty());
        for rec in top.iter() {
            let w = rec.witness();
            for t in w.iter().combinations(3) {
                assert!(is_collinear(t[0], t[1], t[2], p).unwrap(), "p={p} {}", rec.dump_line());
            }
        }
    }
}

#[test]
fn semi_general_prime_bounds() {
    for p in [7u32, 11, 19, 23] {
        assert_eq!(max_cardinality(p, PositionMode::SemiGeneral).unwrap(), (p as u64 + 1) / 2);
    }
    for p in [13u32, 17, 29] {
        let v = max_cardinality(p, PositionMode::SemiGeneral).unwrap();
        assert!((p as u64 - 1) / 2 <= v && v <= (p as u64 + 3) / 2, "p={p} v={v}");
    }
}
