//! Hard instances for the size lower bounds and the matching recovery
//! procedures: a sketch that meets its distortion contract on these inputs
//! reveals every planted bit.

use std::collections::HashSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::metric_space::GeneralMetric;
use crate::error::{Error, Result};
use crate::estimate::QueryContext;

/// Draws of a fresh support before giving up on distinctness.
const SUPPORT_ATTEMPTS: usize = 10_000;

/// `2n` unit vectors in `R^n`: `a_i/√k` for `i < n` and `e_j` at index `n + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct EuclideanInstance {
    pub n: usize,
    pub eps: f64,
    pub k: usize,
    /// `bits[i][j] = a_i(j)`.
    pub bits: Vec<Vec<bool>>,
    pub points: Vec<Vec<f64>>,
}

fn integer_inverse(x: f64, what: &str) -> Result<usize> {
    let r = x.round();
    if !(r >= 1.0 && (x - r).abs() <= 1e-9 * r) {
        return Err(Error::InvalidParameter(format!("{what} must be an integer, got {x}")));
    }
    Ok(r as usize)
}

pub fn gen_lowerbound_euclidean(n: usize, eps: f64, seed: u64) -> Result<EuclideanInstance> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    let k = integer_inverse(1.0 / (eps * eps), "1/eps^2")?;
    if k > n {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut bits = Vec::with_capacity(n);
    let mut attempts = 0;
    while bits.len() < n {
        attempts += 1;
        if attempts > SUPPORT_ATTEMPTS + n {
            return Err(Error::InvalidParameter(format!(
                "could not draw {n} distinct supports of size {k}"
            )));
        }
        let mut support = sample(&mut rng, n, k).into_vec();
        support.sort_unstable();
        if seen.insert(support.clone()) {
            let mut row = vec![false; n];
            for j in support {
                row[j] = true;
            }
            bits.push(row);
        }
    }
    let scale = 1.0 / (k as f64).sqrt();
    let mut points: Vec<Vec<f64>> = bits
        .iter()
        .map(|row| row.iter().map(|&b| if b { scale } else { 0.0 }).collect())
        .collect();
    points.extend((0..n).map(|j| {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        e
    }));
    Ok(EuclideanInstance {
        n,
        eps,
        k,
        bits,
        points,
    })
}

/// Recovery threshold between the guaranteed intervals `≤ 2 − ε − ε²` and `≥ 2 − ε`.
pub fn bit_threshold(eps: f64) -> f64 {
    2.0 - eps - eps * eps / 2.0
}

/// Recovers `a_i(j)` from squared-distance estimates between `a_i/√k` and `e_j`.
pub fn recover_bits_with<F>(n: usize, eps: f64, mut squared: F) -> Result<Vec<Vec<bool>>>
where
    F: FnMut(usize, usize) -> Result<f64>,
{
    let t = bit_threshold(eps);
    (0..n)
        .map(|i| (0..n).map(|j| Ok(squared(i, n + j)? <= t)).collect())
        .collect()
}

pub fn recover_bits(ctx: &QueryContext, n: usize, eps: f64) -> Result<Vec<Vec<bool>>> {
    recover_bits_with(n, eps, |i, j| Ok(ctx.estimate(i, j)?.powi(2)))
}

/// Random metric with `d(x,y) = 1 + k(x,y)·ε`, `k` uniform in `{0, …, 1/ε − 1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralInstance {
    pub n: usize,
    pub eps: f64,
    /// Planted `k(x,y)`, symmetric with zero diagonal.
    pub k: Vec<Vec<u32>>,
    pub metric: GeneralMetric,
}

pub fn gen_lowerbound_general(n: usize, eps: f64, seed: u64) -> Result<GeneralInstance> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1], got {eps}")));
    }
    let levels = integer_inverse(1.0 / eps, "1/eps")? as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut k = vec![vec![0u32; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.random_range(0..levels);
            k[i][j] = v;
            k[j][i] = v;
        }
    }
    let entries = (0..n * n)
        .map(|t| {
            let (i, j) = (t / n, t % n);
            if i == j {
                0.0
            } else {
                1.0 + k[i][j] as f64 * eps
            }
        })
        .collect();
    Ok(GeneralInstance {
        n,
        eps,
        k,
        metric: GeneralMetric::new(n, entries)?,
    })
}

/// Recovers `k(x,y) = round((d̃ − 1)/ε)` from distance estimates.
pub fn recover_distances_with<F>(n: usize, eps: f64, mut estimate: F) -> Result<Vec<Vec<u32>>>
where
    F: FnMut(usize, usize) -> Result<f64>,
{
    let top = (1.0 / eps).round() - 1.0;
    let mut k = vec![vec![0u32; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = ((estimate(i, j)? - 1.0) / eps).round().clamp(0.0, top) as u32;
            k[i][j] = v;
            k[j][i] = v;
        }
    }
    Ok(k)
}

pub fn recover_distances(ctx: &QueryContext, eps: f64) -> Result<Vec<Vec<u32>>> {
    recover_distances_with(ctx.len(), eps, |i, j| ctx.estimate(i, j))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    }

    #[test]
    fn euclidean_instance_identity() {
        let inst = gen_lowerbound_euclidean(16, 0.5, 3).unwrap();
        assert_eq!(inst.k, 4);
        assert_eq!(inst.points.len(), 32);
        for i in 0..16 {
            assert_eq!(inst.bits[i].iter().filter(|&&b| b).count(), 4);
            for j in 0..16 {
                let d2 = sq_dist(&inst.points[i], &inst.points[16 + j]);
                let want = if inst.bits[i][j] { 2.0 - 2.0 * 0.5 } else { 2.0 };
                assert!((d2 - want).abs() < 1e-12, "{d2} vs {want}");
            }
        }
        let distinct: HashSet<_> = inst.bits.iter().collect();
        assert_eq!(distinct.len(), 16);
    }

    #[test]
    fn euclidean_instance_errors() {
        assert!(gen_lowerbound_euclidean(3, 0.5, 0).is_err());
        assert!(gen_lowerbound_euclidean(16, 0.3, 0).is_err());
        assert!(gen_lowerbound_euclidean(4, 0.5, 0).is_err());
    }

    #[test]
    fn threshold_separates_intervals() {
        for eps in [0.5, 0.25, 0.125] {
            let t = bit_threshold(eps);
            assert!(2.0 - eps - eps * eps < t && t < 2.0 - eps);
        }
    }

    #[test]
    fn exact_estimates_recover_everything() {
        let inst = gen_lowerbound_euclidean(32, 0.25, 1).unwrap();
        let got = recover_bits_with(32, 0.25, |i, j| Ok(sq_dist(&inst.points[i], &inst.points[j]))).unwrap();
        assert_eq!(got, inst.bits);
        let zeros = recover_bits_with(16, 0.25, |_, _| Ok(2.0)).unwrap();
        assert!(zeros.iter().flatten().all(|&b| !b));
    }

    #[test]
    fn general_instance() {
        let a = gen_lowerbound_general(3, 0.5, 7).unwrap();
        let b = gen_lowerbound_general(3, 0.5, 7).unwrap();
        assert_eq!(a, b);
        for i in 0..3 {
            assert_eq!(a.metric.get(i, i), 0.0);
            for j in 0..3 {
                assert_eq!(a.metric.get(i, j), a.metric.get(j, i));
                if i != j {
                    let d = a.metric.get(i, j);
                    assert!((1.0..2.0).contains(&d));
                }
            }
        }
        let g = gen_lowerbound_general(30, 0.125, 2).unwrap();
        g.metric.validate_triangle().unwrap();
        let k = recover_distances_with(30, 0.125, |i, j| Ok(g.metric.get(i, j) * (1.0 + 0.03))).unwrap();
        assert_eq!(k, g.k);
    }
}
