//! The uncompressed hierarchy T*: level-ℓ clusters are the connected
//! components of the graph joining points at distance `< 2^ℓ`.
//!
//! Components of a threshold graph are unions along a minimum spanning tree,
//! so the hierarchy is built from one Prim pass over the full distance matrix
//! followed by a union-find sweep over the MST edges sorted by merge level.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metric::{ceil_log2, floor_log2, PointSet};

/// Dense symmetric matrix of pairwise distances.
#[derive(Clone, Debug)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(ps: &PointSet) -> Self {
        let n = ps.len();
        let mut data = vec![0.0; n * n];
        data.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
            let xi = ps.point(i);
            for (j, cell) in row.iter_mut().enumerate() {
                if j != i {
                    *cell = ps.norm().dist(xi, ps.point(j));
                }
            }
        });
        DistanceMatrix { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    /// Minimum distance between two disjoint point sets.
    pub fn set_distance(&self, a: &[usize], b: &[usize]) -> f64 {
        let mut best = f64::INFINITY;
        for &i in a {
            let row = self.row(i);
            for &j in b {
                best = best.min(row[j]);
            }
        }
        best
    }

    /// Point of `from` closest to the set `to`; ties go to the smaller index.
    pub fn closest_in(&self, from: &[usize], to: &[usize]) -> usize {
        let mut best = (f64::INFINITY, usize::MAX);
        for &x in from {
            let row = self.row(x);
            let d = to.iter().fold(f64::INFINITY, |m, &y| m.min(row[y]));
            if d < best.0 || (d == best.0 && x < best.1) {
                best = (d, x);
            }
        }
        best.1
    }
}

/// A node of T*.
#[derive(Clone, Debug, PartialEq)]
pub struct RawNode {
    pub level: u32,
    /// Sorted point indices of the cluster.
    pub members: Vec<usize>,
    pub diameter: f64,
    /// Children ordered by their smallest member.
    pub children: Vec<usize>,
    pub parent: Option<usize>,
}

/// The uncompressed hierarchy.
#[derive(Clone, Debug)]
pub struct RawTree {
    pub nodes: Vec<RawNode>,
    pub root: usize,
    /// Level of the root.
    pub top_level: u32,
}

impl RawTree {
    /// Nodes of a given level, in creation order.
    pub fn level_nodes(&self, level: u32) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(move |&v| self.nodes[v].level == level)
    }
}

/// Smallest `ℓ` with `w < 2^ℓ`.
fn merge_level(w: f64) -> u32 {
    (floor_log2(w) + 1).max(0) as u32
}

/// Prim's algorithm on the complete graph; returns `(weight, a, b)` edges.
fn minimum_spanning_tree(dm: &DistanceMatrix) -> Vec<(f64, usize, usize)> {
    let n = dm.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut link = vec![0usize; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let row = dm.row(current);
        let mut next = usize::MAX;
        let mut next_w = f64::INFINITY;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            if row[j] < best[j] {
                best[j] = row[j];
                link[j] = current;
            }
            if best[j] < next_w || next == usize::MAX {
                next_w = best[j];
                next = j;
            }
        }
        in_tree[next] = true;
        edges.push((next_w, link[next].min(next), link[next].max(next)));
        current = next;
    }
    edges
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller index as representative
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}

/// Builds T* for a point set whose pairwise distances are at least 1.
///
/// The root sits at level `max(ceil(log2 Φ), merge level)`, so it can have a
/// single child when the clusters finish merging early.
pub fn build_hierarchy(ps: &PointSet, dm: &DistanceMatrix) -> Result<RawTree> {
    let n = ps.len();
    if n == 0 {
        return Err(Error::EmptyPointSet);
    }
    for i in 0..n {
        for j in i + 1..n {
            let d = dm.get(i, j);
            if d == 0.0 {
                return Err(Error::DuplicatePoints { i, j });
            }
            if d < 1.0 {
                return Err(Error::BelowUnitDistance { i, j, distance: d });
            }
        }
    }

    let mut edges: Vec<(u32, usize, usize)> = minimum_spanning_tree(dm)
        .into_iter()
        .map(|(w, a, b)| (merge_level(w), a, b))
        .collect();
    edges.sort_unstable();
    let merged_at = edges.last().map_or(0, |e| e.0);
    let top_level = ceil_log2(dm.max()).max(merged_at);

    let mut nodes: Vec<RawNode> = (0..n)
        .map(|i| RawNode {
            level: 0,
            members: vec![i],
            diameter: 0.0,
            children: Vec::new(),
            parent: None,
        })
        .collect();
    // current top node of each live cluster, keyed by union-find representative
    let mut top: Vec<usize> = (0..n).collect();
    let mut sets = DisjointSets::new(n);
    let mut next_edge = 0;

    for level in 1..=top_level {
        while next_edge < edges.len() && edges[next_edge].0 == level {
            let (_, a, b) = edges[next_edge];
            sets.union(a, b);
            next_edge += 1;
        }
        // group the previous level's nodes by their new component
        let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut slot = vec![usize::MAX; n];
        let mut live: Vec<usize> = top.iter().copied().filter(|&v| v != usize::MAX).collect();
        live.sort_unstable_by_key(|&v| nodes[v].members[0]);
        for v in live {
            let rep = sets.find(nodes[v].members[0]);
            if slot[rep] == usize::MAX {
                slot[rep] = groups.len();
                groups.push((rep, Vec::new()));
            }
            groups[slot[rep]].1.push(v);
        }
        let mut new_top = vec![usize::MAX; n];
        for (rep, children) in groups {
            let id = nodes.len();
            let node = merge_children(&nodes, &children, level, dm);
            for &c in &children {
                nodes[c].parent = Some(id);
            }
            nodes.push(node);
            new_top[rep] = id;
        }
        top = new_top;
    }

    let root = top.iter().copied().find(|&v| v != usize::MAX).unwrap_or(0);
    if nodes[root].members.len() != n {
        return Err(Error::Malformed("hierarchy did not merge into one cluster".into()));
    }
    Ok(RawTree {
        nodes,
        root,
        top_level,
    })
}

fn merge_children(nodes: &[RawNode], children: &[usize], level: u32, dm: &DistanceMatrix) -> RawNode {
    if let [only] = children {
        let c = &nodes[*only];
        return RawNode {
            level,
            members: c.members.clone(),
            diameter: c.diameter,
            children: vec![*only],
            parent: None,
        };
    }
    let mut diameter = children
        .iter()
        .map(|&c| nodes[c].diameter)
        .fold(0.0, f64::max);
    for (a, &ca) in children.iter().enumerate() {
        for &cb in &children[a + 1..] {
            for &i in &nodes[ca].members {
                let row = dm.row(i);
                for &j in &nodes[cb].members {
                    diameter = diameter.max(row[j]);
                }
            }
        }
    }
    let mut members: Vec<usize> = children
        .iter()
        .flat_map(|&c| nodes[c].members.iter().copied())
        .collect();
    members.sort_unstable();
    RawNode {
        level,
        members,
        diameter,
        children: children.to_vec(),
        parent: None,
    }
}
