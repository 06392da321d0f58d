//! Minimal cost-complexity (weakest link) pruning.

use super::{Attribute, TrainingExample, TreeNode};

/// Training misclassifications if the node were a leaf.
fn leaf_risk(node: &TreeNode) -> u64 {
    node.n() - node.counts[node.majority()]
}

/// Training misclassifications of the subtree's leaves, and its leaf count.
fn subtree_risk(node: &TreeNode) -> (u64, usize) {
    if node.is_leaf() {
        return (leaf_risk(node), 1);
    }
    node.children().fold((0, 0), |(r, l), c| {
        let (cr, cl) = subtree_risk(c);
        (r + cr, l + cl)
    })
}

/// `(R(node) - R(subtree)) / (leaves - 1)` for an internal node.
fn alpha(node: &TreeNode) -> f64 {
    let (r_sub, leaves) = subtree_risk(node);
    (leaf_risk(node) as f64 - r_sub as f64) / (leaves as f64 - 1.0)
}

fn min_alpha(node: &TreeNode) -> Option<f64> {
    if node.is_leaf() {
        return None;
    }
    let own = alpha(node);
    Some(node.children().filter_map(min_alpha).fold(own, f64::min))
}

fn collapse(node: &mut TreeNode, threshold: f64) {
    if node.is_leaf() {
        return;
    }
    if alpha(node) <= threshold {
        node.split = None;
        return;
    }
    if let Some(split) = node.split.as_mut() {
        for b in &mut split.branches {
            collapse(&mut b.child, threshold);
        }
    }
}

/// The nested subtree sequence, starting with `tree` itself and ending with
/// the root collapsed to a leaf. Each step collapses every internal node
/// whose α equals the current minimum.
pub fn cost_complexity_sequence(tree: &TreeNode) -> Vec<TreeNode> {
    let mut seq = vec![tree.clone()];
    let mut current = tree.clone();
    while let Some(a) = min_alpha(&current) {
        collapse(&mut current, a + 1e-12);
        seq.push(current.clone());
    }
    seq
}

/// Picks the member of the cost-complexity sequence with the fewest holdout
/// errors, preferring the smaller tree on ties. An empty holdout returns
/// the tree unchanged.
pub fn prune_tree(tree: &TreeNode, holdout: &[TrainingExample], attributes: &[Attribute]) -> TreeNode {
    if holdout.is_empty() {
        log::warn!("empty pruning holdout; keeping the unpruned tree");
        return tree.clone();
    }
    let mut best: Option<(usize, TreeNode)> = None;
    for t in cost_complexity_sequence(tree) {
        let err = t.misclassified(holdout, attributes);
        if best.as_ref().is_none_or(|(be, _)| err <= *be) {
            best = Some((err, t));
        }
    }
    best.expect("sequence is never empty").1
}
