//! End-to-end acceptance checks, one line of output per criterion.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use common::{brute_force_partition, check_tree, clustered_points, raw_partition, rng, uniform_points, SLACK};
use rlt_sketch::euclid::{build_euclidean, target_dim};
use rlt_sketch::harness::{
    embed_general_metric, gen_lowerbound_euclidean, gen_lowerbound_general, recover_bits, recover_distances,
};
use rlt_sketch::tree::{build_hierarchy, DistanceMatrix};
use rlt_sketch::{
    build_euclidean_sketch, build_lp_sketch, decode, encode, randomized_grid_round, Epsilon, Norm, PointSet,
    QueryContext, QueryStats, RelativeLocationTree, SketchContents,
};

type Outcome = Result<String, String>;

fn all_pairs(n: usize) -> impl ParallelIterator<Item = (usize, usize)> {
    (0..n).into_par_iter().flat_map_iter(move |i| (i + 1..n).map(move |j| (i, j)))
}

/// Worst `|estimate/exact − 1|` over all pairs of an ℓp sketch.
fn worst_lp_error(ps: &PointSet, ctx: &QueryContext) -> f64 {
    let scale = ps.scale();
    all_pairs(ps.len())
        .map(|(i, j)| {
            let exact = ps.distance(i, j) * scale;
            (ctx.estimate(i, j).unwrap() - exact).abs() / exact
        })
        .reduce(|| 0.0, f64::max)
}

fn lp_correctness() -> Outcome {
    let mut configs = Vec::new();
    for n in [100, 500] {
        for d in [5, 20] {
            for norm in [Norm::Lp(1), Norm::Lp(2), Norm::Inf] {
                for eps in [0.25, 0.1] {
                    for rep in 0..20u64 {
                        configs.push((n, d, norm, eps, rep));
                    }
                }
            }
        }
    }
    let mut worst_ratio = 0.0f64;
    let mut failures = 0;
    for (k, &(n, d, norm, eps, rep)) in configs.iter().enumerate() {
        let mut r = rng(1000 + k as u64);
        let rows = if rep % 2 == 0 {
            uniform_points(&mut r, n, d, 1000.0)
        } else {
            clustered_points(&mut r, n, d)
        };
        let ps = PointSet::normalized(rows, norm).map_err(|e| e.to_string())?;
        let bits = build_lp_sketch(&ps, Epsilon::from_f64(eps).unwrap()).map_err(|e| e.to_string())?;
        let ctx = QueryContext::from_bits(&bits).map_err(|e| e.to_string())?;
        let worst = worst_lp_error(&ps, &ctx);
        worst_ratio = worst_ratio.max(worst / (4.0 * eps));
        if worst > 4.0 * eps * (1.0 + SLACK) {
            failures += 1;
        }
    }
    let detail = format!(
        "{} instances, {} out of band, worst error {:.3} of the 4ε budget",
        configs.len(),
        failures,
        worst_ratio
    );
    if failures == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn general_metrics() -> Outcome {
    let eps = 0.125;
    let mut worst_ratio = 0.0f64;
    for seed in 0..5 {
        let inst = gen_lowerbound_general(200, eps, seed).map_err(|e| e.to_string())?;
        let ps = embed_general_metric(&inst.metric).map_err(|e| e.to_string())?;
        let sketch_eps = Epsilon::from_f64(eps).unwrap();
        let ctx = QueryContext::from_bits(&build_lp_sketch(&ps, sketch_eps).unwrap()).unwrap();
        let worst = worst_lp_error(&ps, &ctx);
        worst_ratio = worst_ratio.max(worst / (4.0 * eps));
        if worst > 4.0 * eps * (1.0 + SLACK) {
            return Err(format!("seed {seed}: error {worst} exceeds 4ε"));
        }
        // (1 ± 4ε′) with ε′ = ε/16 is a (1 ± ε/4) sketch
        let fine = Epsilon::from_f64(eps / 16.0).unwrap();
        let ctx = QueryContext::from_bits(&build_lp_sketch(&ps, fine).unwrap()).unwrap();
        let k = recover_distances(&ctx, eps).map_err(|e| e.to_string())?;
        if k != inst.k {
            return Err(format!("seed {seed}: planted distances not recovered"));
        }
    }
    Ok(format!(
        "5 metrics with n = 200, worst error {:.3} of the 4ε budget, all planted k(x,y) recovered",
        worst_ratio
    ))
}

fn tree_invariants() -> Outcome {
    let mut nodes = 0;
    for k in 0..100u64 {
        let mut r = rng(3000 + k);
        let n = r.random_range(2..=300);
        let d = r.random_range(1..=8);
        let norm = common::random_norm(&mut r);
        let eps = Epsilon::new(r.random_range(1..=3), r.random_range(2..=7)).unwrap();
        let rows = if k % 3 == 0 {
            uniform_points(&mut r, n, d, 500.0)
        } else {
            clustered_points(&mut r, n, d)
        };
        let ps = PointSet::normalized(rows, norm).map_err(|e| e.to_string())?;
        let dm = DistanceMatrix::new(&ps);
        let raw = build_hierarchy(&ps, &dm).map_err(|e| e.to_string())?;
        if k % 10 == 0 {
            for level in 0..=raw.top_level {
                if raw_partition(&raw, level) != brute_force_partition(&ps, level) {
                    return Err(format!("instance {k}: level {level} partition differs from the definition"));
                }
            }
        }
        let tree = RelativeLocationTree::build_with_distances(&ps, &dm, eps).map_err(|e| e.to_string())?;
        check_tree(&tree, Some(&raw)).map_err(|e| format!("instance {k}: {e}"))?;
        nodes += tree.nodes.len();
    }
    Ok(format!("100 instances, {nodes} nodes checked"))
}

fn euclidean_concentration() -> Outcome {
    let (n, d, eps) = (1000, 1024, 0.2);
    let dp = target_dim(n, eps);
    let mut lines = Vec::new();
    let mut ok = true;
    for seed in 0..5u64 {
        let mut r = ChaCha8Rng::seed_from_u64(4000 + seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| r.sample::<f64, _>(StandardNormal) * 10.0).collect())
            .collect();
        let ps = PointSet::normalized(rows, Norm::Lp(2)).map_err(|e| e.to_string())?;
        let bits = build_euclidean_sketch(&ps, eps, seed).map_err(|e| e.to_string())?;
        let ctx = QueryContext::from_bits(&bits).map_err(|e| e.to_string())?;
        if ctx.header().d as usize != dp {
            return Err(format!("projected dimension {} != {dp}", ctx.header().d));
        }
        let scale2 = ps.scale() * ps.scale();
        let (good, total) = all_pairs(n)
            .map(|(i, j)| {
                let exact = ps.distance(i, j).powi(2) * scale2;
                let z = ctx.estimate_euclidean_squared(i, j).unwrap();
                (usize::from((z - exact).abs() <= 48.0 * eps * exact), 1usize)
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        let frac = good as f64 / total as f64;
        ok &= frac >= 0.999;
        lines.push(format!("{frac:.5}"));
    }
    let detail = format!("d′ = {dp}, in-band fractions per seed [{}]", lines.join(", "));
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rounding_unbiasedness() -> Outcome {
    let mut r = rng(5000);
    let trials = 100_000;
    let d = 6;
    let mut worst = 0.0f64;
    for v in 0..10 {
        let cell = 0.25 + r.random::<f64>() * 4.0;
        let y: Vec<f64> = (0..d).map(|_| (r.random::<f64>() - 0.5) * 40.0).collect();
        let mut sum = vec![0.0; d];
        let mut sq = vec![0.0; d];
        for _ in 0..trials {
            let sigma: Vec<f64> = (0..d).map(|_| r.random::<f64>()).collect();
            let c = randomized_grid_round(&y, cell, &sigma).map_err(|e| e.to_string())?;
            for (k, x) in c.to_vector().into_iter().enumerate() {
                sum[k] += x;
                sq[k] += x * x;
            }
        }
        for k in 0..d {
            let mean = sum[k] / trials as f64;
            let var = (sq[k] / trials as f64 - mean * mean).max(0.0) * trials as f64 / (trials - 1) as f64;
            let se = (var / trials as f64).sqrt();
            let z = (mean - y[k]).abs() / se.max(f64::MIN_POSITIVE);
            worst = worst.max(z);
            if z > 4.0 {
                return Err(format!("vector {v} coordinate {k}: mean {mean} vs {} ({z:.2} SE)", y[k]));
            }
        }
    }
    Ok(format!("10 vectors × 10^5 shifts, largest deviation {worst:.2} standard errors"))
}

/// Points on the integer grid with one pair at distance 1 and two opposite
/// corners, so both the minimum distance and the diameter are fixed.
fn pinned_points(n: usize, d: usize, side: i64, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    let mut rows: Vec<Vec<f64>> = vec![vec![0.0; d], vec![side as f64; d]];
    let mut unit = vec![(side / 2) as f64; d];
    rows.push(unit.clone());
    unit[0] += 1.0;
    rows.push(unit);
    let mut seen: std::collections::HashSet<Vec<i64>> = rows.iter().map(|r| r.iter().map(|&x| x as i64).collect()).collect();
    while rows.len() < n {
        let p: Vec<i64> = (0..d).map(|_| r.random_range(0..=side)).collect();
        if seen.insert(p.clone()) {
            rows.push(p.into_iter().map(|x| x as f64).collect());
        }
    }
    rows
}

fn codec() -> Outcome {
    for k in 0..200u64 {
        let mut r = rng(6000 + k);
        let n = r.random_range(2..=120);
        let d = r.random_range(1..=6);
        let rows = clustered_points(&mut r, n, d);
        let euclidean = k % 2 == 1;
        let norm = if euclidean { Norm::Lp(2) } else { common::random_norm(&mut r) };
        let ps = PointSet::normalized(rows, norm).map_err(|e| e.to_string())?;
        let contents = if euclidean {
            let (tree, aug) = build_euclidean(&ps, 0.5, k).map_err(|e| e.to_string())?;
            SketchContents::from_tree(&tree, Some(aug)).unwrap()
        } else {
            let eps = Epsilon::new(1, r.random_range(1..=6)).unwrap();
            let tree = RelativeLocationTree::build(&ps, eps).map_err(|e| e.to_string())?;
            SketchContents::from_tree(&tree, None).unwrap()
        };
        let bits = encode(&contents).map_err(|e| e.to_string())?;
        let back = decode(&bits).map_err(|e| e.to_string())?;
        if back != contents {
            return Err(format!("tree {k}: decoded contents differ"));
        }
        let report = bits.size_report().unwrap();
        if report.header + report.sections().iter().sum::<u64>() != bits.len_bits() {
            return Err(format!("tree {k}: size report does not add up"));
        }
    }
    let sizes: Vec<f64> = [250, 500, 1000]
        .iter()
        .map(|&n| {
            (0..3u64)
                .map(|s| {
                    let ps = PointSet::new(pinned_points(n, 3, 1 << 12, 7000 + s), Norm::Lp(2)).unwrap();
                    build_lp_sketch(&ps, Epsilon::new(1, 3).unwrap()).unwrap().len_bits() as f64
                })
                .sum::<f64>()
                / 3.0
        })
        .collect();
    let growth = [sizes[1] / sizes[0], sizes[2] / sizes[1]];
    let detail = format!(
        "200 round trips exact; mean bits at n = 250/500/1000: {:.0}/{:.0}/{:.0}, growth {:.3}×, {:.3}×",
        sizes[0], sizes[1], sizes[2], growth[0], growth[1]
    );
    if growth.iter().all(|&g| g <= 2.3) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn lower_bound_recovery() -> Outcome {
    let (n, eps) = (64, 0.25);
    let mut dims = 0;
    for seed in 0..3u64 {
        let inst = gen_lowerbound_euclidean(n, eps, seed).map_err(|e| e.to_string())?;
        let ps = PointSet::normalized(inst.points.clone(), Norm::Lp(2)).map_err(|e| e.to_string())?;
        let bits = build_euclidean_sketch(&ps, eps / 8.0, 100 + seed).map_err(|e| e.to_string())?;
        let ctx = QueryContext::from_bits(&bits).map_err(|e| e.to_string())?;
        dims = ctx.header().d;
        let got = recover_bits(&ctx, n, eps).map_err(|e| e.to_string())?;
        let wrong: usize = got
            .iter()
            .flatten()
            .zip(inst.bits.iter().flatten())
            .filter(|(a, b)| a != b)
            .count();
        if wrong > 0 {
            return Err(format!("seed {seed}: {wrong} of 4096 bits wrong"));
        }
    }
    Ok(format!("3 seeds × 4096 bits recovered, d′ = {dims}"))
}

fn query_cost() -> Outcome {
    let mut details = Vec::new();
    let far = (1u64 << 40) as f64;
    let instances: Vec<(&str, Vec<Vec<f64>>, Norm)> = vec![
        (
            "line",
            (0..499).map(|i| vec![i as f64 * 1.5]).chain([vec![far]]).collect(),
            Norm::Lp(2),
        ),
        (
            "diagonal",
            (0..499)
                .map(|i| vec![i as f64 * 0.75, i as f64 * 0.75])
                .chain([vec![far / 2.0, far / 2.0]])
                .collect(),
            Norm::Lp(1),
        ),
        (
            "comb",
            (0..499)
                .map(|i| vec![(i / 25) as f64 * 3.0, (i % 25) as f64 * 1.25])
                .chain([vec![far, 0.0]])
                .collect(),
            Norm::Inf,
        ),
    ];
    for (name, rows, norm) in instances {
        let ps = PointSet::normalized(rows, norm).map_err(|e| e.to_string())?;
        let bits = build_lp_sketch(&ps, Epsilon::new(1, 3).unwrap()).map_err(|e| e.to_string())?;
        let ctx = QueryContext::new_uncached(decode(&bits).unwrap()).unwrap();
        let k = u64::from(ctx.header().landmark_k());
        let worst = all_pairs(ps.len())
            .map(|(i, j)| {
                let mut stats = QueryStats::default();
                ctx.estimate_with_stats(i, j, &mut stats).unwrap();
                stats.nodes_visited()
            })
            .max()
            .unwrap_or(0);
        details.push(format!("{name}: max {worst} visits, 4K = {}", 4 * k));
        if worst > 4 * k {
            return Err(details.join("; "));
        }
    }
    Ok(details.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("lp correctness", lp_correctness),
        ("general metrics", general_metrics),
        ("tree invariants", tree_invariants),
        ("euclidean concentration", euclidean_concentration),
        ("rounding unbiasedness", rounding_unbiasedness),
        ("codec", codec),
        ("lower-bound recovery", lower_bound_recovery),
        ("query cost", query_cost),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let id = k + 1;
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id} ({name}): PASS [{secs:.1}s] {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id} ({name}): FAIL [{secs:.1}s] {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
