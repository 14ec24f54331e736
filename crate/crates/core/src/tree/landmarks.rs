//! Landmark selection on the ingress trees.

use super::RelativeLocationTree;
use crate::metric::{ceil_log2, Norm};

/// `K = ceil(log2(2·2^L·d^{1/p}))` for a tree whose root sits at level `L`.
pub fn landmark_depth(top_level: u32, d: usize, norm: Norm) -> u32 {
    top_level + 1 + ceil_log2(norm.root_dim(d))
}

/// Picks landmarks so that every node reaches one within `k` ingress hops.
///
/// Per subtree: take a deepest remaining node of the ingress tree, climb `k`
/// steps (or to the root), mark that node and drop its ingress descendants.
/// Returns the sorted landmark ids; subtree roots can appear.
pub fn select_landmarks(tree: &RelativeLocationTree, k: u32) -> Vec<usize> {
    let nodes = &tree.nodes;
    let mut removed = vec![false; nodes.len()];
    let mut depth = vec![0u32; nodes.len()];
    let mut ingress_children: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    let mut landmarks = Vec::new();

    for &r in &tree.subtree_roots {
        let order = tree
            .ingress_order(r)
            .expect("ingress order validated during surrogate computation");
        for &v in &order[1..] {
            let p = nodes[v].ingress;
            depth[v] = depth[p] + 1;
            ingress_children[p].push(v);
        }
        let mut by_depth = order.clone();
        by_depth.sort_by_key(|&v| (std::cmp::Reverse(depth[v]), v));
        for v in by_depth {
            if removed[v] {
                continue;
            }
            let mut top = v;
            for _ in 0..k {
                if top == r {
                    break;
                }
                top = nodes[top].ingress;
            }
            landmarks.push(top);
            let mut stack = vec![top];
            while let Some(w) = stack.pop() {
                if removed[w] {
                    continue;
                }
                removed[w] = true;
                stack.extend(ingress_children[w].iter().copied());
            }
        }
    }
    landmarks.sort_unstable();
    landmarks
}
