mod common;

use common::{brute_force_partition, check_tree, clustered_points, raw_partition, rng};
use proptest::prelude::*;
use rlt_sketch::tree::{build_hierarchy, DistanceMatrix};
use rlt_sketch::{Epsilon, Norm, PointSet, RelativeLocationTree};

fn norm_strategy() -> impl Strategy<Value = Norm> {
    prop_oneof![Just(Norm::Lp(1)), Just(Norm::Lp(2)), Just(Norm::Lp(4)), Just(Norm::Inf)]
}

fn points_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..4, 2usize..40).prop_flat_map(|(d, n)| {
        prop::collection::vec(prop::collection::vec(-64i32..64, d), n)
            .prop_map(|rows| rows.into_iter().map(|r| r.into_iter().map(|x| x as f64 * 0.75).collect()).collect())
    })
}

fn dedup(rows: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for r in rows {
        if !out.contains(&r) {
            out.push(r);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hierarchy_matches_definition(rows in points_strategy(), norm in norm_strategy()) {
        let rows = dedup(rows);
        prop_assume!(rows.len() >= 2);
        let ps = PointSet::normalized(rows, norm).unwrap();
        let dm = DistanceMatrix::new(&ps);
        let raw = build_hierarchy(&ps, &dm).unwrap();
        for level in 0..=raw.top_level {
            prop_assert_eq!(raw_partition(&raw, level), brute_force_partition(&ps, level));
        }
        prop_assert_eq!(brute_force_partition(&ps, raw.top_level).len(), 1);
    }

    #[test]
    fn built_trees_satisfy_invariants(
        rows in points_strategy(),
        norm in norm_strategy(),
        eps_exp in 1u32..6,
    ) {
        let rows = dedup(rows);
        prop_assume!(rows.len() >= 2);
        let ps = PointSet::normalized(rows, norm).unwrap();
        let dm = DistanceMatrix::new(&ps);
        let raw = build_hierarchy(&ps, &dm).unwrap();
        let tree = RelativeLocationTree::build_with_distances(&ps, &dm, Epsilon::new(1, eps_exp).unwrap()).unwrap();
        if let Err(msg) = check_tree(&tree, Some(&raw)) {
            prop_assert!(false, "{}", msg);
        }
    }
}

#[test]
fn clustered_instances_satisfy_invariants() {
    let mut r = rng(11);
    for (n, d, norm, eps) in [
        (80, 2, Norm::Lp(2), Epsilon::new(1, 2).unwrap()),
        (120, 5, Norm::Lp(1), Epsilon::new(3, 5).unwrap()),
        (60, 3, Norm::Inf, Epsilon::new(1, 6).unwrap()),
        (150, 1, Norm::Lp(2), Epsilon::new(1, 1).unwrap()),
    ] {
        let ps = PointSet::normalized(clustered_points(&mut r, n, d), norm).unwrap();
        let dm = DistanceMatrix::new(&ps);
        let raw = build_hierarchy(&ps, &dm).unwrap();
        let tree = RelativeLocationTree::build_with_distances(&ps, &dm, eps).unwrap();
        check_tree(&tree, Some(&raw)).unwrap();
    }
}

#[test]
fn single_point() {
    let ps = PointSet::new(vec![vec![3.0, 4.0]], Norm::Lp(2)).unwrap();
    let tree = RelativeLocationTree::build(&ps, Epsilon::half()).unwrap();
    assert_eq!(tree.nodes.len(), 1);
    assert_eq!(tree.subtree_leaves, vec![0]);
    check_tree(&tree, None).unwrap();
}

#[test]
fn powers_of_two_on_a_line() {
    // gaps 1, 2, 4, ..., 2^9: each point joins exactly one level above the last
    let rows: Vec<Vec<f64>> = (0..11).map(|k| vec![if k == 0 { 0.0 } else { (1u64 << k) as f64 - 1.0 }]).collect();
    let ps = PointSet::new(rows, Norm::Lp(2)).unwrap();
    let dm = DistanceMatrix::new(&ps);
    let raw = build_hierarchy(&ps, &dm).unwrap();
    for level in 0..=raw.top_level {
        assert_eq!(raw_partition(&raw, level), brute_force_partition(&ps, level));
    }
    let tree = RelativeLocationTree::build_with_distances(&ps, &dm, Epsilon::new(1, 3).unwrap()).unwrap();
    check_tree(&tree, Some(&raw)).unwrap();
}
