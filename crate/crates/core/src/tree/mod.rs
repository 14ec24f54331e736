//! The relative location tree.
//!
//! Construction runs in stages: [`build_hierarchy`] produces T*,
//! [`compress_paths`] turns long 1-paths into annotated long edges, and the
//! annotators in [`annotate`] assign centers, ingresses and surrogates.
//! [`select_landmarks`] finally picks the nodes whose shifted surrogates are
//! stored verbatim to bound query time.

pub mod annotate;
pub mod compress;
pub mod hierarchy;
pub mod landmarks;

pub use annotate::{assign_centers, assign_ingresses, compute_surrogates, ingress_order};
pub use compress::compress_paths;
pub use hierarchy::{build_hierarchy, DistanceMatrix, RawNode, RawTree};
pub use landmarks::{landmark_depth, select_landmarks};

use crate::error::Result;
use crate::metric::{Epsilon, Norm, PointSet};

/// Kind of the edge joining a node to its parent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    Short,
    /// Replaces a 1-path of the given original length.
    Long(u32),
}

/// A node of the compressed tree T. Ids are assigned in preorder.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeNode {
    pub id: usize,
    pub level: u32,
    /// Sorted point indices of the cluster.
    pub members: Vec<usize>,
    pub diameter: f64,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Edge to the parent; `Short` for the root.
    pub parent_edge: EdgeKind,
    pub center: usize,
    pub ingress: usize,
    /// Root of the subtree (component after deleting long edges) holding the node.
    pub subtree_root: usize,
    /// Parent of this node in the sibling spanning tree τ of its parent.
    pub tau_parent: Option<usize>,
    /// `1/γ(v)`, an integer; absent for subtree roots.
    pub gamma_code: Option<u64>,
    /// Grid coordinates of η(v) in units of `γ(v)/d^{1/p}`.
    pub eta: Option<Vec<i64>>,
    /// Grid coordinates of η_ε(v) in units of `γ(v)·ε/d^{1/p}`; subtree leaves only.
    pub eta_eps: Option<Vec<i64>>,
}

impl TreeNode {
    pub fn gamma(&self) -> Option<f64> {
        self.gamma_code.map(|g| 1.0 / g as f64)
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// The annotated tree together with the builder-side data that never reaches
/// the sketch (points, exact surrogates).
#[derive(Clone, Debug)]
pub struct RelativeLocationTree {
    pub nodes: Vec<TreeNode>,
    pub root: usize,
    pub eps: Epsilon,
    /// Level of the root; the sketch header stores it as the Φ exponent.
    pub top_level: u32,
    /// `leaf_of[i]` is the leaf whose cluster is `{x_i}`.
    pub leaf_of: Vec<usize>,
    /// L(T): leaves of T and tops of long edges, in preorder.
    pub subtree_leaves: Vec<usize>,
    /// Roots of the subtrees F(T), in preorder.
    pub subtree_roots: Vec<usize>,
    /// Integer surrogate offsets `S(v) = d^{1/p}·(s*(v) − x_{c(r)})`.
    pub surrogate_units: Vec<Vec<i64>>,
    /// Coarse surrogates s*(v).
    pub surrogates: Vec<Vec<f64>>,
    /// Leaf surrogates s*_ε(v) for subtree leaves.
    pub leaf_surrogates: Vec<Option<Vec<f64>>>,
    /// Landmark nodes, sorted; subtree roots among them carry the zero vector.
    pub landmarks: Vec<usize>,
    /// Maximum number of ingress hops from any node to a landmark.
    pub landmark_k: u32,
    points: PointSet,
}

impl RelativeLocationTree {
    /// Runs the full construction on a point set with minimum distance ≥ 1.
    pub fn build(ps: &PointSet, eps: Epsilon) -> Result<Self> {
        let dm = DistanceMatrix::new(ps);
        Self::build_with_distances(ps, &dm, eps)
    }

    pub fn build_with_distances(ps: &PointSet, dm: &DistanceMatrix, eps: Epsilon) -> Result<Self> {
        let raw = build_hierarchy(ps, dm)?;
        let mut nodes = compress_paths(&raw, eps);
        assign_centers(&mut nodes);
        let mut leaf_of = vec![0; ps.len()];
        for v in &nodes {
            if v.is_leaf() {
                leaf_of[v.members[0]] = v.id;
            }
        }
        assign_ingresses(&mut nodes, dm, &leaf_of)?;
        let subtree_leaves = nodes
            .iter()
            .filter(|v| v.children.iter().all(|&c| nodes[c].parent_edge != EdgeKind::Short))
            .map(|v| v.id)
            .collect();
        let subtree_roots = nodes
            .iter()
            .filter(|v| v.subtree_root == v.id)
            .map(|v| v.id)
            .collect();
        let n_nodes = nodes.len();
        let mut tree = RelativeLocationTree {
            nodes,
            root: 0,
            eps,
            top_level: raw.top_level,
            leaf_of,
            subtree_leaves,
            subtree_roots,
            surrogate_units: vec![Vec::new(); n_nodes],
            surrogates: vec![Vec::new(); n_nodes],
            leaf_surrogates: vec![None; n_nodes],
            landmarks: Vec::new(),
            landmark_k: 0,
            points: ps.clone(),
        };
        compute_surrogates(&mut tree)?;
        let k = landmark_depth(tree.top_level, ps.dim(), ps.norm());
        tree.landmarks = select_landmarks(&tree, k);
        tree.landmark_k = k;
        Ok(tree)
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn norm(&self) -> Norm {
        self.points.norm()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_subtree_root(&self, v: usize) -> bool {
        self.nodes[v].subtree_root == v
    }

    pub fn is_subtree_leaf(&self, v: usize) -> bool {
        self.subtree_leaves.binary_search(&v).is_ok()
    }

    pub fn long_edge_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|v| matches!(v.parent_edge, EdgeKind::Long(_)))
            .count()
    }

    /// Nodes of a subtree in ingress order.
    pub fn ingress_order(&self, subtree_root: usize) -> Result<Vec<usize>> {
        ingress_order(&self.nodes, subtree_root)
    }
}
