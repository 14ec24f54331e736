//! Centers, ingresses, the ingress order and surrogates.

use std::collections::VecDeque;

use super::hierarchy::DistanceMatrix;
use super::{EdgeKind, RelativeLocationTree, TreeNode};
use crate::error::{Error, Result};
use crate::metric::{floor_to_grid, pow2};

/// Slack allowed on `‖η*(v)‖ ≤ 1` for floating-point rounding.
pub const ETA_SLACK: f64 = 1e-9;

/// `c(v)` = smallest center among the children; leaves keep their point.
pub fn assign_centers(nodes: &mut [TreeNode]) {
    for v in (0..nodes.len()).rev() {
        if let Some(c) = nodes[v].children.iter().map(|&c| nodes[c].center).min() {
            nodes[v].center = c;
        } else {
            nodes[v].center = nodes[v].members[0];
        }
    }
}

fn short_children(nodes: &[TreeNode], v: usize) -> Vec<usize> {
    nodes[v]
        .children
        .iter()
        .copied()
        .filter(|&c| nodes[c].parent_edge == EdgeKind::Short)
        .collect()
}

/// Assigns `in(v)` and the sibling spanning trees τ.
///
/// For a node `v` the children form the graph H_v (edge iff the clusters are
/// within `2^{ℓ(v)}`); τ_v is its BFS tree from the child holding `c(v)`. That
/// child gets `in = v`; any other child `u_i` with τ-parent `u_j` gets the
/// subtree leaf below `u_j` containing the point of `C(u_j)` closest to `C(u_i)`.
pub fn assign_ingresses(nodes: &mut [TreeNode], dm: &DistanceMatrix, leaf_of: &[usize]) -> Result<()> {
    for v in 0..nodes.len() {
        if nodes[v].subtree_root == v {
            nodes[v].ingress = v;
        }
        let kids = short_children(nodes, v);
        if kids.is_empty() {
            continue;
        }
        let first = kids
            .iter()
            .position(|&c| nodes[c].center == nodes[v].center)
            .ok_or(Error::MissingAnnotation { node: v, field: "center" })?;
        let k = kids.len();
        let reach = pow2(nodes[v].level as i32);
        let mut adjacent = vec![false; k * k];
        for a in 0..k {
            for b in a + 1..k {
                let d = dm.set_distance(&nodes[kids[a]].members, &nodes[kids[b]].members);
                adjacent[a * k + b] = d <= reach;
                adjacent[b * k + a] = d <= reach;
            }
        }
        let mut tau = vec![usize::MAX; k];
        tau[first] = first;
        let mut queue = VecDeque::from([first]);
        while let Some(a) = queue.pop_front() {
            for b in 0..k {
                if tau[b] == usize::MAX && adjacent[a * k + b] {
                    tau[b] = a;
                    queue.push_back(b);
                }
            }
        }
        if tau.contains(&usize::MAX) {
            return Err(Error::DisconnectedChildren { node: v });
        }
        let root = nodes[v].subtree_root;
        for b in 0..k {
            let u = kids[b];
            if b == first {
                nodes[u].ingress = v;
                nodes[u].tau_parent = None;
                continue;
            }
            let uj = kids[tau[b]];
            let x = dm.closest_in(&nodes[uj].members, &nodes[u].members);
            let mut w = leaf_of[x];
            while nodes[w].subtree_root != root {
                w = nodes[w].parent.ok_or(Error::IngressCycle { node: u })?;
            }
            nodes[u].ingress = w;
            nodes[u].tau_parent = Some(uj);
        }
    }
    Ok(())
}

/// DFS of the subtree rooted at `root`, visiting the children of every node in
/// DFS order of its sibling tree τ. Every node appears after its ingress.
pub fn ingress_order(nodes: &[TreeNode], root: usize) -> Result<Vec<usize>> {
    let mut order = Vec::new();
    visit(nodes, root, &mut order);
    let mut position = vec![usize::MAX; nodes.len()];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    for &v in &order[1..] {
        let p = position[nodes[v].ingress];
        if p == usize::MAX || p >= position[v] {
            return Err(Error::IngressCycle { node: v });
        }
    }
    Ok(order)
}

fn visit(nodes: &[TreeNode], v: usize, order: &mut Vec<usize>) {
    order.push(v);
    let kids = short_children(nodes, v);
    let Some(&first) = kids.iter().find(|&&c| nodes[c].tau_parent.is_none()) else {
        return;
    };
    let mut stack = vec![first];
    let mut tau_order = Vec::with_capacity(kids.len());
    while let Some(u) = stack.pop() {
        tau_order.push(u);
        // reversed so smaller siblings are popped first
        for &c in kids.iter().rev() {
            if nodes[c].tau_parent == Some(u) {
                stack.push(c);
            }
        }
    }
    for u in tau_order {
        visit(nodes, u, order);
    }
}

/// Precision code `1/γ(v) = 5 + ceil(Δ(v)/2^{ℓ(v)})`.
pub fn gamma_code(diameter: f64, level: u32) -> u64 {
    5 + (diameter / pow2(level as i32)).ceil() as u64
}

/// Computes γ, η, η_ε and the surrogates subtree by subtree in ingress order.
pub fn compute_surrogates(tree: &mut RelativeLocationTree) -> Result<()> {
    let d = tree.dim();
    let norm = tree.norm();
    let root_dim = norm.root_dim(d);
    let eps = tree.eps.value();
    let roots = tree.subtree_roots.clone();
    for r in roots {
        let order = ingress_order(&tree.nodes, r)?;
        let base = tree.points().point(tree.nodes[r].center).to_vec();
        tree.surrogate_units[r] = vec![0; d];
        tree.surrogates[r] = base.clone();
        if tree.is_subtree_leaf(r) {
            tree.leaf_surrogates[r] = Some(base.clone());
        }
        for &v in &order[1..] {
            let node = &tree.nodes[v];
            let scale = pow2(node.level as i32);
            let code = gamma_code(node.diameter, node.level);
            let gamma = 1.0 / code as f64;
            let from = node.ingress;
            let x = tree.points().point(node.center);
            let eta_star: Vec<f64> = x
                .iter()
                .zip(&tree.surrogates[from])
                .map(|(a, b)| (a - b) * gamma / scale)
                .collect();
            let len = norm.norm(&eta_star);
            if len > 1.0 + ETA_SLACK {
                return Err(Error::SurrogateBound { node: v, norm: len });
            }
            let eta = floor_to_grid(&eta_star, gamma / root_dim)?;
            let step = i64::try_from(1u64 << node.level.min(63)).map_err(|_| Error::Overflow("level"))?;
            let units = tree.surrogate_units[from]
                .iter()
                .zip(&eta)
                .map(|(&s, &g)| {
                    g.checked_mul(step)
                        .and_then(|t| t.checked_add(s))
                        .ok_or(Error::Overflow("surrogate"))
                })
                .collect::<Result<Vec<i64>>>()?;
            let surrogate = base
                .iter()
                .zip(&units)
                .map(|(b, &u)| b + u as f64 / root_dim)
                .collect();
            if tree.is_subtree_leaf(v) {
                let eta_eps = floor_to_grid(&eta_star, gamma * eps / root_dim)?;
                let fine = base
                    .iter()
                    .zip(&tree.surrogate_units[from])
                    .zip(&eta_eps)
                    .map(|((b, &s), &g)| b + (s as f64 + g as f64 * scale * eps) / root_dim)
                    .collect();
                tree.leaf_surrogates[v] = Some(fine);
                tree.nodes[v].eta_eps = Some(eta_eps);
            }
            tree.nodes[v].gamma_code = Some(code);
            tree.nodes[v].eta = Some(eta);
            tree.surrogate_units[v] = units;
            tree.surrogates[v] = surrogate;
        }
    }
    Ok(())
}
