use std::collections::{BTreeMap, BTreeSet};

use super::stats::{chi2_critical, chi2_statistic, classification_error, partition_distance, smoothed_distribution};
use super::{AttrValue, Attribute, Branch, LearnError, LearnerParams, Split, TrainingExample, TreeNode};

/// A set of attribute values treated as one branch, with the label counts
/// of the examples that carry them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueGroup {
    pub values: BTreeSet<AttrValue>,
    pub counts: Vec<u64>,
}

impl ValueGroup {
    fn n(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn absorb(&mut self, other: ValueGroup) {
        self.values.extend(other.values);
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
    }

    fn error(&self, m: usize) -> f64 {
        classification_error(&smoothed_distribution(&self.counts, m, self.n()))
    }
}

/// The candidate (index into the window attributes) whose partition is
/// closest to the class partition. `candidates` must be in fixed attribute
/// order; ties go to the earliest.
pub fn select_attribute(examples: &[&TrainingExample], candidates: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &k in candidates {
        let d = partition_distance(examples, k);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((k, d));
        }
    }
    best.map(|(k, _)| k)
}

/// Regroups per-value subsets.
///
/// First the pair of groups with the smallest χ² statistic is merged, for
/// as long as that statistic stays below the critical value (homogeneity
/// not rejected at `alpha`, `m - 1` degrees of freedom). Then every group
/// whose classification error is not below `parent_error` is folded into
/// one residual group, placed last.
pub fn merge_branches(mut groups: Vec<ValueGroup>, parent_error: f64, m: usize, alpha: f64) -> Vec<ValueGroup> {
    let critical = chi2_critical(alpha, m.saturating_sub(1));
    while groups.len() >= 2 {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..groups.len() {
            for j in i + 1..groups.len() {
                let s = chi2_statistic(&groups[i].counts, &groups[j].counts, m);
                if best.is_none_or(|(_, _, bs)| s < bs) {
                    best = Some((i, j, s));
                }
            }
        }
        let (i, j, stat) = best.expect("at least one pair");
        if stat >= critical {
            break;
        }
        let g = groups.remove(j);
        groups[i].absorb(g);
    }
    if groups.len() < 2 {
        return groups;
    }
    let (kept, residual): (Vec<ValueGroup>, Vec<ValueGroup>) =
        groups.into_iter().partition(|g| g.error(m) < parent_error);
    let mut out = kept;
    let mut residual = residual.into_iter();
    if let Some(mut r) = residual.next() {
        for g in residual {
            r.absorb(g);
        }
        out.push(r);
    }
    out
}

fn label_counts(examples: &[&TrainingExample], m: usize) -> Vec<u64> {
    let mut counts = vec![0u64; m];
    for e in examples {
        counts[e.label] += 1;
    }
    counts
}

struct Grower<'p> {
    m: usize,
    attributes: &'p [Attribute],
    params: &'p LearnerParams,
}

impl Grower<'_> {
    fn grow(&self, examples: &[&TrainingExample], unused: &[usize]) -> TreeNode {
        let mut node = TreeNode::leaf(label_counts(examples, self.m));
        let n = examples.len();
        let top = node.counts.iter().copied().max().unwrap_or(0);
        if n < self.params.min_examples || top as f64 / n as f64 >= self.params.purity_threshold || unused.is_empty() {
            return node;
        }
        let parent_error = classification_error(&node.distribution);
        let mut candidates = unused.to_vec();
        while let Some(k) = select_attribute(examples, &candidates) {
            let mut subsets: BTreeMap<&AttrValue, Vec<u64>> = BTreeMap::new();
            for e in examples {
                subsets.entry(&e.values[k]).or_insert_with(|| vec![0; self.m])[e.label] += 1;
            }
            let groups: Vec<ValueGroup> = subsets
                .into_iter()
                .map(|(v, counts)| ValueGroup {
                    values: BTreeSet::from([v.clone()]),
                    counts,
                })
                .collect();
            let groups = merge_branches(groups, parent_error, self.m, self.params.chi2_alpha);
            if groups.len() < 2 {
                // The attribute separates nothing here; try the next best.
                candidates.retain(|c| *c != k);
                continue;
            }
            let rest: Vec<usize> = unused.iter().copied().filter(|c| *c != k).collect();
            let branches = groups
                .into_iter()
                .map(|g| {
                    let sub: Vec<&TrainingExample> = examples
                        .iter()
                        .copied()
                        .filter(|e| g.values.contains(&e.values[k]))
                        .collect();
                    Branch {
                        child: self.grow(&sub, &rest),
                        values: g.values,
                    }
                })
                .collect();
            node.split = Some(Split {
                attribute: self.attributes[k],
                branches,
            });
            break;
        }
        node
    }
}

/// Grows a tree on examples of one ambiguity class with `m` tags.
/// `attributes` lists the example attributes in fixed order.
pub fn grow_tree(
    examples: &[TrainingExample],
    attributes: &[Attribute],
    m: usize,
    params: &LearnerParams,
) -> Result<TreeNode, LearnError> {
    if examples.is_empty() {
        return Err(LearnError::NoExamples);
    }
    params.validate()?;
    let refs: Vec<&TrainingExample> = examples.iter().collect();
    let unused: Vec<usize> = (0..attributes.len()).collect();
    let grower = Grower { m, attributes, params };
    Ok(grower.grow(&refs, &unused))
}
