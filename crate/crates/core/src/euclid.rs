//! Euclidean pipeline: Gaussian projection, a constant-ε tree, and
//! randomized corner roundings stored for every subtree leaf.
//!
//! Random streams: the projection matrix uses stream 0 of a ChaCha8 generator
//! seeded with the user seed; the two shifts σ′ and σ″ use streams 1 and 2.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::codec::{encode, AugEntry, AugmentationTable, SketchBits, SketchContents};
use crate::error::{Error, Result};
use crate::metric::{pow2, randomized_grid_round, Epsilon, Norm, PointSet};
use crate::tree::RelativeLocationTree;

/// Relative slack on the pre-rounding norm bounds.
const BOUND_SLACK: f64 = 1e-9;

/// Parameters of the random projection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JlConfig {
    pub target_dim: usize,
    pub seed: u64,
    pub eps: f64,
}

impl JlConfig {
    /// `d′ = max(ceil(3·ε^{-2}·log2 n), 1)`.
    pub fn new(n: usize, eps: f64, seed: u64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {eps}")));
        }
        Ok(JlConfig {
            target_dim: target_dim(n, eps),
            seed,
            eps,
        })
    }
}

pub fn target_dim(n: usize, eps: f64) -> usize {
    let raw = (3.0 / (eps * eps) * (n.max(1) as f64).log2()).ceil();
    (raw as usize).max(1)
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Row-major `d′ × d` matrix with i.i.d. `N(0, 1/d′)` entries.
pub fn projection_matrix(d: usize, cfg: &JlConfig) -> Vec<f64> {
    let mut rng = stream(cfg.seed, 0);
    let scale = 1.0 / (cfg.target_dim as f64).sqrt();
    (0..cfg.target_dim * d)
        .map(|_| rng.sample::<f64, _>(StandardNormal) * scale)
        .collect()
}

/// Projects the points and renormalizes them by a power of two so the minimum
/// distance is again in `[1, 2)`; the scale exponents accumulate.
pub fn jl_transform(ps: &PointSet, cfg: &JlConfig) -> Result<PointSet> {
    if ps.norm() != Norm::Lp(2) {
        return Err(Error::NotL2);
    }
    if cfg.target_dim == 0 {
        return Err(Error::InvalidParameter("target dimension must be >= 1".into()));
    }
    let d = ps.dim();
    let dp = cfg.target_dim;
    let m = projection_matrix(d, cfg);
    let mut out = vec![0.0; ps.len() * dp];
    out.par_chunks_mut(dp).enumerate().for_each(|(i, y)| {
        let x = ps.point(i);
        for (k, yk) in y.iter_mut().enumerate() {
            let row = &m[k * d..(k + 1) * d];
            *yk = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    });
    PointSet::normalize_flat(out, ps.len(), dp, Norm::Lp(2), ps.scale_exponent())
}

/// The two independent uniform shifts σ′, σ″ ∈ [0,1]^{d′}.
pub fn shifts(d: usize, seed: u64) -> [Vec<f64>; 2] {
    [1, 2].map(|id| {
        let mut rng = stream(seed, id);
        (0..d).map(|_| rng.random::<f64>()).collect()
    })
}

/// Randomized corners for every subtree leaf `v`:
/// `A_v` rounds `x_{c(v)} − s*(v)` on the grid of side `2^{ℓ(v)}/√d`, and,
/// when `v`'s subtree hangs below a long edge with top `u`, `B_v` rounds
/// `x_{c(v)} − x_{c(u)}` on the grid of side `2^{ℓ(u)}/√d`.
pub fn build_augmentations(tree: &RelativeLocationTree, sigma: &[Vec<f64>; 2]) -> Result<AugmentationTable> {
    let ps = tree.points();
    if ps.norm() != Norm::Lp(2) {
        return Err(Error::NotL2);
    }
    let d = ps.dim();
    let root_dim = (d as f64).sqrt();
    let norm = Norm::Lp(2);
    let entries = tree
        .subtree_leaves
        .par_iter()
        .map(|&v| {
            let node = &tree.nodes[v];
            let x = ps.point(node.center);
            let y: Vec<f64> = x.iter().zip(&tree.surrogates[v]).map(|(a, b)| a - b).collect();
            let reach = pow2(node.level as i32);
            let len = norm.norm(&y);
            if len > reach * (1.0 + BOUND_SLACK) {
                return Err(Error::SurrogateBound { node: v, norm: len / reach });
            }
            let cell = reach / root_dim;
            let a = [
                randomized_grid_round(&y, cell, &sigma[0])?.corner,
                randomized_grid_round(&y, cell, &sigma[1])?.corner,
            ];
            let r = node.subtree_root;
            let b = match tree.nodes[r].parent {
                Some(u) if r != tree.root => {
                    let top = &tree.nodes[u];
                    let z: Vec<f64> = x
                        .iter()
                        .zip(ps.point(top.center))
                        .map(|(a, b)| a - b)
                        .collect();
                    let reach = pow2(top.level as i32);
                    let len = norm.norm(&z);
                    if len > reach * (1.0 + BOUND_SLACK) {
                        return Err(Error::SurrogateBound { node: v, norm: len / reach });
                    }
                    let cell = reach / root_dim;
                    Some([
                        randomized_grid_round(&z, cell, &sigma[0])?.corner,
                        randomized_grid_round(&z, cell, &sigma[1])?.corner,
                    ])
                }
                _ => None,
            };
            Ok(AugEntry { a, b })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AugmentationTable { entries })
}

/// Projects, builds the tree at ε = 1/2 and draws the augmentations.
pub fn build_euclidean(ps: &PointSet, eps: f64, seed: u64) -> Result<(RelativeLocationTree, AugmentationTable)> {
    let cfg = JlConfig::new(ps.len(), eps, seed)?;
    let projected = jl_transform(ps, &cfg)?;
    let tree = RelativeLocationTree::build(&projected, Epsilon::half())?;
    let sigma = shifts(cfg.target_dim, seed);
    let aug = build_augmentations(&tree, &sigma)?;
    Ok((tree, aug))
}

/// Full Euclidean sketch. The shifts are dropped after use.
pub fn build_euclidean_sketch(ps: &PointSet, eps: f64, seed: u64) -> Result<SketchBits> {
    let (tree, aug) = build_euclidean(ps, eps, seed)?;
    encode(&SketchContents::from_tree(&tree, Some(aug))?)
}
