//! Path compression of T*.
//!
//! A maximal 1-path `v_0, v_1, …, v_k` (interior nodes with one child each)
//! becomes a long edge `v_1 → v_k` annotated with `k` when `k ≥ 2` and
//! `Δ(v_k) ≤ ε·2^{ℓ(v_1)}`. The top node of every long edge then satisfies
//! `Δ ≤ ε·2^ℓ`, which is what the leaf surrogates rely on.

use super::hierarchy::RawTree;
use super::{EdgeKind, TreeNode};
use crate::metric::{pow2, Epsilon};

/// Whether the 1-path ending at a node of level `bottom_level` with diameter
/// `diameter`, of original length `k`, is replaced by a long edge.
pub fn should_compress(k: u32, bottom_level: u32, diameter: f64, eps: Epsilon) -> bool {
    if k < 2 {
        return false;
    }
    let top_level = (bottom_level + k - 1) as i32;
    // Δ ≤ num·2^{top − exp}, both sides exact in binary floating point
    diameter <= eps.numerator() as f64 * pow2(top_level - eps.exponent() as i32)
}

/// Produces the compressed tree with node ids in preorder. Centers, ingresses
/// and surrogate fields are left for the annotators.
pub fn compress_paths(raw: &RawTree, eps: Epsilon) -> Vec<TreeNode> {
    let mut out = Vec::new();
    let root = push(&mut out, raw, raw.root, None, EdgeKind::Short);
    emit_below(&mut out, raw, raw.root, root, eps);
    out
}

fn emit_below(out: &mut Vec<TreeNode>, raw: &RawTree, raw_v0: usize, v0: usize, eps: Epsilon) {
    for &c in &raw.nodes[raw_v0].children {
        let mut path = vec![c];
        while let [only] = raw.nodes[*path.last().unwrap()].children[..] {
            path.push(only);
        }
        let bottom = *path.last().unwrap();
        let k = path.len() as u32;
        let b = &raw.nodes[bottom];
        if should_compress(k, b.level, b.diameter, eps) {
            let top = push(out, raw, path[0], Some(v0), EdgeKind::Short);
            let id = push(out, raw, bottom, Some(top), EdgeKind::Long(k));
            emit_below(out, raw, bottom, id, eps);
        } else {
            let mut parent = v0;
            for &p in &path {
                parent = push(out, raw, p, Some(parent), EdgeKind::Short);
            }
            emit_below(out, raw, bottom, parent, eps);
        }
    }
}

fn push(
    out: &mut Vec<TreeNode>,
    raw: &RawTree,
    raw_id: usize,
    parent: Option<usize>,
    edge: EdgeKind,
) -> usize {
    let id = out.len();
    let r = &raw.nodes[raw_id];
    let subtree_root = match (parent, edge) {
        (Some(p), EdgeKind::Short) => out[p].subtree_root,
        _ => id,
    };
    out.push(TreeNode {
        id,
        level: r.level,
        members: r.members.clone(),
        diameter: r.diameter,
        parent,
        children: Vec::new(),
        parent_edge: edge,
        center: r.members[0],
        ingress: id,
        subtree_root,
        tau_parent: None,
        gamma_code: None,
        eta: None,
        eta_eps: None,
    });
    if let Some(p) = parent {
        out[p].children.push(id);
    }
    id
}
