//! Distance queries against a decoded sketch.
//!
//! Shifted surrogates are kept as integer vectors `S(v)` in units of
//! `d^{-1/p}`: the subtree root has `S = 0` and every other node adds
//! `2^{ℓ(v)}·η(v)` to the value of its ingress. They are computed on demand by
//! walking ingress links to the nearest stored landmark.

use std::sync::OnceLock;

use crate::codec::{decode, Layout, SketchBits, SketchContents, SketchHeader};
use crate::error::{Error, Result};
use crate::metric::pow2;
use crate::tree::EdgeKind;

/// Work counters for one or more queries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QueryStats {
    /// Parent-link steps taken while locating the lowest common ancestor.
    pub parent_steps: u64,
    /// Ingress-link steps taken while recovering shifted surrogates.
    pub ingress_hops: u64,
}

impl QueryStats {
    pub fn nodes_visited(&self) -> u64 {
        self.parent_steps + self.ingress_hops
    }
}

/// Read-only query state over a decoded sketch.
#[derive(Debug)]
pub struct QueryContext {
    contents: SketchContents,
    layout: Layout,
    leaf_of: Vec<usize>,
    landmark_of: Vec<Option<usize>>,
    cache: Option<Vec<OnceLock<Vec<i64>>>>,
    root_dim: f64,
}

/// The two ends of a query inside the subtree of their lowest common ancestor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QueryNodes {
    pub lca: usize,
    pub v_i: usize,
    pub v_j: usize,
}

impl QueryContext {
    pub fn new(contents: SketchContents) -> Result<Self> {
        Self::build(contents, true)
    }

    /// A context that recomputes every surrogate from the landmarks.
    pub fn new_uncached(contents: SketchContents) -> Result<Self> {
        Self::build(contents, false)
    }

    pub fn from_bits(bits: &SketchBits) -> Result<Self> {
        Self::new(decode(bits)?)
    }

    fn build(contents: SketchContents, cached: bool) -> Result<Self> {
        let layout = contents.layout();
        let m = contents.nodes.len();
        let n = contents.header.n as usize;
        let mut leaf_of = vec![usize::MAX; n];
        for (v, node) in contents.nodes.iter().enumerate() {
            if node.children.is_empty() {
                if leaf_of[node.center] != usize::MAX {
                    return Err(Error::Malformed(format!("two leaves for point {}", node.center)));
                }
                leaf_of[node.center] = v;
            }
        }
        if leaf_of.contains(&usize::MAX) {
            return Err(Error::Malformed("some point has no leaf".into()));
        }
        let mut landmark_of = vec![None; m];
        for (k, (v, _)) in contents.landmarks.iter().enumerate() {
            landmark_of[*v] = Some(k);
        }
        let root_dim = contents.header.root_dim();
        let cache = cached.then(|| (0..m).map(|_| OnceLock::new()).collect());
        Ok(QueryContext {
            contents,
            layout,
            leaf_of,
            landmark_of,
            cache,
            root_dim,
        })
    }

    pub fn header(&self) -> &SketchHeader {
        &self.contents.header
    }

    pub fn contents(&self) -> &SketchContents {
        &self.contents
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.contents.header.n as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn leaf(&self, i: usize) -> usize {
        self.leaf_of[i]
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        let n = self.len();
        for index in [i, j] {
            if index >= n {
                return Err(Error::IndexOutOfRange { index, n });
            }
        }
        if i == j {
            return Err(Error::SamePoint(i));
        }
        Ok(())
    }

    /// `S(v)`, the shifted surrogate of `v` in units of `d^{-1/p}`.
    pub fn surrogate_units(&self, v: usize, stats: &mut QueryStats) -> Result<Vec<i64>> {
        let nodes = &self.contents.nodes;
        let mut path = Vec::new();
        let mut w = v;
        let base = loop {
            if let Some(cached) = self.cache.as_ref().and_then(|c| c[w].get()) {
                break cached.clone();
            }
            if self.layout.is_subtree_root(w) {
                break vec![0; self.contents.header.d as usize];
            }
            if let Some(k) = self.landmark_of[w] {
                break self.contents.landmarks[k].1.clone();
            }
            path.push(w);
            w = nodes[w].ingress;
            stats.ingress_hops += 1;
        };
        let mut acc = base;
        for &u in path.iter().rev() {
            let eta = nodes[u]
                .eta
                .as_ref()
                .ok_or(Error::MissingAnnotation { node: u, field: "eta" })?;
            let step = 1i64
                .checked_shl(nodes[u].level)
                .filter(|_| nodes[u].level < 63)
                .ok_or(Error::Overflow("level"))?;
            for (a, &g) in acc.iter_mut().zip(eta) {
                *a = g
                    .checked_mul(step)
                    .and_then(|t| t.checked_add(*a))
                    .ok_or(Error::Overflow("surrogate"))?;
            }
            if let Some(cache) = &self.cache {
                let _ = cache[u].set(acc.clone());
            }
        }
        Ok(acc)
    }

    /// Shifted surrogate `s(v)` or, with `fine`, the shifted leaf surrogate
    /// `s_ε(v)`, in the sketch's internal (rescaled) coordinates.
    pub fn shifted_surrogate(&self, v: usize, fine: bool) -> Result<Vec<f64>> {
        let mut stats = QueryStats::default();
        let units = if fine {
            self.fine_units(v, &mut stats)?
        } else {
            self.surrogate_units(v, &mut stats)?
                .into_iter()
                .map(|s| s as f64)
                .collect()
        };
        Ok(units.into_iter().map(|u| u / self.root_dim).collect())
    }

    /// `d^{1/p}·s_ε(v)`.
    fn fine_units(&self, v: usize, stats: &mut QueryStats) -> Result<Vec<f64>> {
        if v >= self.contents.nodes.len() || self.layout.leaf_index[v].is_none() {
            return Err(Error::FineSurrogateUnavailable { node: v });
        }
        if self.layout.is_subtree_root(v) {
            return Ok(vec![0.0; self.contents.header.d as usize]);
        }
        let node = &self.contents.nodes[v];
        let fine = node
            .eta_eps
            .as_ref()
            .ok_or(Error::FineSurrogateUnavailable { node: v })?;
        stats.ingress_hops += 1;
        let base = self.surrogate_units(node.ingress, stats)?;
        let step = pow2(node.level as i32) * self.contents.header.eps.value();
        Ok(base
            .iter()
            .zip(fine)
            .map(|(&s, &g)| s as f64 + g as f64 * step)
            .collect())
    }

    /// Lowest common ancestor of the two leaves and the lowest nodes above
    /// each leaf that share its subtree.
    pub fn locate(&self, i: usize, j: usize, stats: &mut QueryStats) -> Result<QueryNodes> {
        self.check_pair(i, j)?;
        let nodes = &self.contents.nodes;
        let (mut a, mut b) = (self.leaf_of[i], self.leaf_of[j]);
        let (mut v_i, mut v_j) = (a, b);
        let up = |x: usize, v: &mut usize, stats: &mut QueryStats| -> usize {
            let p = nodes[x].parent.expect("distinct leaves meet below the root");
            if matches!(nodes[x].edge, EdgeKind::Long(_)) {
                *v = p;
            }
            stats.parent_steps += 1;
            p
        };
        while a != b {
            let (la, lb) = (nodes[a].level, nodes[b].level);
            if la <= lb {
                a = up(a, &mut v_i, stats);
            }
            if lb <= la {
                b = up(b, &mut v_j, stats);
            }
        }
        Ok(QueryNodes { lca: a, v_i, v_j })
    }

    /// ℓp estimate `‖s_ε(v_i) − s_ε(v_j)‖_p`, within `1 ± 4ε` of the true
    /// distance, in input units.
    pub fn estimate_lp(&self, i: usize, j: usize) -> Result<f64> {
        self.estimate_lp_with_stats(i, j, &mut QueryStats::default())
    }

    pub fn estimate_lp_with_stats(&self, i: usize, j: usize, stats: &mut QueryStats) -> Result<f64> {
        let q = self.locate(i, j, stats)?;
        let si = self.fine_units(q.v_i, stats)?;
        let sj = self.fine_units(q.v_j, stats)?;
        let dist = self.contents.header.norm.dist(&si, &sj) / self.root_dim;
        Ok(dist * pow2(self.contents.header.scale_exponent as i32))
    }

    /// Probabilistic surrogate `X_i` for the subtree rooted at `r`, in units
    /// of `1/√d`. `copy` selects the random shift (0 or 1).
    pub fn probabilistic_units(&self, i: usize, r: usize, copy: usize, stats: &mut QueryStats) -> Result<Vec<i128>> {
        let aug = self
            .contents
            .augmentations
            .as_ref()
            .ok_or(Error::NotEuclidean)?;
        if copy > 1 {
            return Err(Error::InvalidParameter(format!("copy must be 0 or 1, got {copy}")));
        }
        let nodes = &self.contents.nodes;
        // subtree leaves on the path from leaf(x_i) up to the first node of r's subtree
        let mut chain = Vec::new();
        let mut w = self.leaf_of[i];
        loop {
            if self.layout.leaf_index[w].is_some() && self.layout.subtree_root[w] != r {
                chain.push(w);
            }
            if self.layout.subtree_root[w] == r {
                break;
            }
            w = nodes[w].parent.ok_or(Error::NotInCluster { point: i, node: r })?;
            stats.parent_steps += 1;
        }
        let v_i = w;
        let entry = |v: usize| {
            self.layout.leaf_index[v]
                .map(|k| &aug.entries[k])
                .ok_or(Error::MissingAnnotation { node: v, field: "augmentation" })
        };
        let base = self.surrogate_units(v_i, stats)?;
        let scale_vi = pow2_i128(nodes[v_i].level)?;
        let mut x: Vec<i128> = base
            .iter()
            .zip(&entry(v_i)?.a[copy])
            .map(|(&s, &a)| s as i128 + scale_vi * a as i128)
            .collect();
        let mut above = v_i;
        for &w in chain.iter().rev() {
            let b = entry(w)?
                .b
                .as_ref()
                .ok_or(Error::MissingAnnotation { node: w, field: "long-edge augmentation" })?;
            let scale = pow2_i128(nodes[above].level)?;
            for (xk, &bk) in x.iter_mut().zip(&b[copy]) {
                *xk += scale * bk as i128;
            }
            above = w;
        }
        Ok(x)
    }

    /// `X_i` as a real vector relative to `x_{c(r)}`, in the sketch's internal coordinates.
    pub fn probabilistic_surrogate(&self, i: usize, r: usize, copy: usize) -> Result<Vec<f64>> {
        let units = self.probabilistic_units(i, r, copy, &mut QueryStats::default())?;
        Ok(units.into_iter().map(|u| u as f64 / self.root_dim).collect())
    }

    /// `Z_1·Z_2`, the squared-distance estimate of the Euclidean sketch, in input units.
    pub fn estimate_euclidean_squared(&self, i: usize, j: usize) -> Result<f64> {
        self.estimate_euclidean_squared_with_stats(i, j, &mut QueryStats::default())
    }

    pub fn estimate_euclidean_squared_with_stats(
        &self,
        i: usize,
        j: usize,
        stats: &mut QueryStats,
    ) -> Result<f64> {
        if !self.contents.header.euclidean {
            return Err(Error::NotEuclidean);
        }
        let q = self.locate(i, j, stats)?;
        let r = self.layout.subtree_root[q.lca];
        let z = |copy: usize, stats: &mut QueryStats| -> Result<Vec<i128>> {
            let xi = self.probabilistic_units(i, r, copy, stats)?;
            let xj = self.probabilistic_units(j, r, copy, stats)?;
            Ok(xi.iter().zip(&xj).map(|(a, b)| a - b).collect())
        };
        let z1 = z(0, stats)?;
        let z2 = z(1, stats)?;
        let dot: i128 = z1.iter().zip(&z2).map(|(a, b)| a * b).sum();
        let d = self.contents.header.d as f64;
        Ok(dot as f64 / d * pow2(2 * self.contents.header.scale_exponent as i32))
    }

    /// `sqrt(max(0, Z_1·Z_2))`.
    pub fn estimate_euclidean(&self, i: usize, j: usize) -> Result<f64> {
        Ok(self.estimate_euclidean_squared(i, j)?.max(0.0).sqrt())
    }

    /// Distance estimate using the method matching the sketch type.
    pub fn estimate(&self, i: usize, j: usize) -> Result<f64> {
        if self.contents.header.euclidean {
            self.estimate_euclidean(i, j)
        } else {
            self.estimate_lp(i, j)
        }
    }

    pub fn estimate_with_stats(&self, i: usize, j: usize, stats: &mut QueryStats) -> Result<f64> {
        if self.contents.header.euclidean {
            Ok(self
                .estimate_euclidean_squared_with_stats(i, j, stats)?
                .max(0.0)
                .sqrt())
        } else {
            self.estimate_lp_with_stats(i, j, stats)
        }
    }
}

fn pow2_i128(level: u32) -> Result<i128> {
    if level >= 100 {
        return Err(Error::Overflow("level"));
    }
    Ok(1i128 << level)
}
