#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use rlt_sketch::metric::pow2;
use rlt_sketch::tree::{EdgeKind, RawTree};
use rlt_sketch::{Norm, PointSet, RelativeLocationTree};

pub const SLACK: f64 = 1e-9;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gaussian blobs at random scales, so trees mix dense clusters, isolated
/// points and long 1-paths.
pub fn clustered_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    let blobs = rng.random_range(1..=6.min(n));
    let centers: Vec<(Vec<f64>, f64)> = (0..blobs)
        .map(|_| {
            let spread = pow2(rng.random_range(0..12));
            let c = (0..d).map(|_| rng.random::<f64>() * pow2(rng.random_range(4..16))).collect();
            (c, spread)
        })
        .collect();
    (0..n)
        .map(|_| {
            let (c, s) = &centers[rng.random_range(0..blobs)];
            c.iter().map(|&x| x + s * rng.sample::<f64, _>(StandardNormal)).collect()
        })
        .collect()
}

pub fn uniform_points(rng: &mut ChaCha8Rng, n: usize, d: usize, side: f64) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.random::<f64>() * side).collect()).collect()
}

pub fn random_norm(rng: &mut ChaCha8Rng) -> Norm {
    match rng.random_range(0..4) {
        0 => Norm::Lp(1),
        1 => Norm::Lp(2),
        2 => Norm::Lp(3),
        _ => Norm::Inf,
    }
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Level-by-level clustering straight from the definition: at level ℓ the
/// clusters are the connected components of "distance < 2^ℓ". Each partition is
/// returned as sorted member lists in order of their smallest member.
pub fn brute_force_partition(ps: &PointSet, level: u32) -> Vec<Vec<usize>> {
    let n = ps.len();
    let mut parent: Vec<usize> = (0..n).collect();
    let reach = pow2(level as i32);
    for i in 0..n {
        for j in i + 1..n {
            if ps.distance(i, j) < reach {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = find(&mut parent, i);
        groups[r].push(i);
    }
    groups.retain(|g| !g.is_empty());
    groups.sort();
    groups
}

pub fn raw_partition(raw: &RawTree, level: u32) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = raw.level_nodes(level).map(|v| raw.nodes[v].members.clone()).collect();
    groups.sort();
    groups
}

fn diameter(ps: &PointSet, members: &[usize]) -> f64 {
    let mut best = 0.0f64;
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            best = best.max(ps.distance(i, j));
        }
    }
    best
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

/// Checks the structural and metric guarantees of a built tree node by node.
pub fn check_tree(tree: &RelativeLocationTree, raw: Option<&RawTree>) -> Result<(), String> {
    let ps = tree.points();
    let n = ps.len();
    let norm = ps.norm();
    let eps = tree.eps.value();
    let nodes = &tree.nodes;
    let root = tree.root;

    ensure!(nodes[root].members.len() == n, "root does not hold every point");
    ensure!(nodes[root].level == tree.top_level, "root level mismatch");

    let mut inside = vec![false; n];
    for v in nodes {
        // structure
        for &c in &v.children {
            ensure!(nodes[c].parent == Some(v.id), "child {c} of {} has the wrong parent", v.id);
            let gap = v.level - nodes[c].level;
            match nodes[c].parent_edge {
                EdgeKind::Short => ensure!(gap == 1, "short edge {}->{c} spans {gap} levels", v.id),
                EdgeKind::Long(k) => {
                    ensure!(k >= 2 && gap == k - 1, "long edge {}->{c} of length {k} spans {gap}", v.id)
                }
            }
        }
        if !v.children.is_empty() {
            let mut union: Vec<usize> = v.children.iter().flat_map(|&c| nodes[c].members.clone()).collect();
            union.sort_unstable();
            ensure!(union == v.members, "children of {} do not partition it", v.id);
            let min_center = v.children.iter().map(|&c| nodes[c].center).min().unwrap();
            ensure!(v.center == min_center, "center of {} is not the minimum child center", v.id);
        } else {
            ensure!(v.members.len() == 1 && v.center == v.members[0], "leaf {} is not a singleton", v.id);
            ensure!(v.level == 0, "leaf {} above level 0", v.id);
        }
        ensure!(
            (diameter(ps, &v.members) - v.diameter).abs() <= SLACK * v.diameter.max(1.0),
            "diameter of {} is wrong",
            v.id
        );

        // separation: points outside C(v) are at least 2^ℓ(v) away
        if v.id != root {
            for &i in &v.members {
                inside[i] = true;
            }
            let reach = pow2(v.level as i32);
            for &i in &v.members {
                for j in 0..n {
                    if !inside[j] {
                        ensure!(
                            ps.distance(i, j) >= reach,
                            "points {i} and {j} closer than 2^{} across node {}",
                            v.level,
                            v.id
                        );
                    }
                }
            }
            for &i in &v.members {
                inside[i] = false;
            }
        }

        // ingress bounds
        let in_v = &nodes[v.ingress];
        ensure!(in_v.level <= v.level + 1, "ingress of {} too high", v.id);
        let gap = ps.distance(v.center, in_v.center);
        let bound = 3.0 * pow2(v.level as i32) + v.diameter;
        ensure!(gap <= bound * (1.0 + SLACK), "center of {} is {gap} from its ingress, bound {bound}", v.id);
        ensure!(in_v.subtree_root == v.subtree_root, "ingress of {} leaves its subtree", v.id);

        // surrogates
        let reach = pow2(v.level as i32);
        let err = norm.dist(ps.point(v.center), &tree.surrogates[v.id]);
        ensure!(err <= reach * (1.0 + SLACK), "surrogate of {} off by {err} > {reach}", v.id);
        let is_root = tree.is_subtree_root(v.id);
        ensure!(v.gamma_code.is_some() != is_root, "gamma presence wrong at {}", v.id);
        ensure!(v.eta.is_some() != is_root, "eta presence wrong at {}", v.id);
    }

    // subtree leaves
    for v in nodes {
        let expected = v.children.iter().all(|&c| nodes[c].parent_edge != EdgeKind::Short);
        ensure!(tree.is_subtree_leaf(v.id) == expected, "L(T) membership wrong at {}", v.id);
    }
    for &u in &tree.subtree_leaves {
        let v = &nodes[u];
        let reach = pow2(v.level as i32);
        ensure!(v.diameter <= reach * eps * (1.0 + SLACK), "subtree leaf {u} has diameter {}", v.diameter);
        let fine = tree.leaf_surrogates[u].as_ref().ok_or(format!("no leaf surrogate at {u}"))?;
        let err = norm.dist(ps.point(v.center), fine);
        ensure!(err <= reach * eps * (1.0 + SLACK), "leaf surrogate of {u} off by {err}");
    }

    // counts
    let log_inv_eps = (1.0 / eps).log2();
    ensure!(
        nodes.len() as f64 <= 2.0 * n as f64 * (2.0 + log_inv_eps),
        "{} nodes for n = {n}",
        nodes.len()
    );
    ensure!(tree.long_edge_count() <= 2 * n, "too many long edges");
    ensure!(tree.subtree_leaves.len() <= 3 * n, "too many subtree leaves");
    let log_sum: f64 = nodes
        .iter()
        .filter(|v| v.diameter > 0.0)
        .map(|v| (v.diameter / pow2(v.level as i32)).log2())
        .sum();
    ensure!(log_sum <= 4.0 * n as f64, "log-diameter sum {log_sum} exceeds 4n");

    if let Some(raw) = raw {
        let total: f64 = raw
            .nodes
            .iter()
            .map(|v| v.diameter / pow2(v.level as i32))
            .sum();
        ensure!(total <= 4.0 * n as f64, "diameter sum {total} exceeds 4n");
    }

    // ingress order and landmark reach
    let k = tree.landmark_k as usize;
    let mut is_landmark = vec![false; nodes.len()];
    for &l in &tree.landmarks {
        is_landmark[l] = true;
    }
    for &r in &tree.subtree_roots {
        let order = tree.ingress_order(r).map_err(|e| e.to_string())?;
        let mut pos = vec![usize::MAX; nodes.len()];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        for &v in &order[1..] {
            ensure!(pos[nodes[v].ingress] < pos[v], "node {v} precedes its ingress");
        }
        for &v in &order {
            let mut w = v;
            let mut hops = 0;
            while !is_landmark[w] && w != r {
                w = nodes[w].ingress;
                hops += 1;
            }
            ensure!(hops <= k, "node {v} is {hops} ingress hops from a landmark, K = {k}");
        }
    }
    Ok(())
}
