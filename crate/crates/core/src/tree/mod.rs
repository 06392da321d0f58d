//! Statistical decision trees over fixed context windows, one per
//! ambiguity class.
//!
//! Growth is top-down: at each node the attribute whose value partition is
//! closest (normalized information distance) to the class partition is
//! selected, its values are split and then regrouped by χ² homogeneity
//! tests, and the recursion stops on near-pure or small nodes. Trees are
//! post-pruned by minimal cost-complexity against held-out examples.

mod examples;
mod grow;
mod io;
mod learn;
mod prune;
mod stats;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use examples::{build_examples, extract_ambiguity_classes, AmbiguityClass, TrainingExample};
pub use grow::{grow_tree, merge_branches, select_attribute, ValueGroup};
pub use io::{parse_trees, write_trees, TreeFileError};
pub use learn::{learn_trees, LearnedTree};
pub use prune::{cost_complexity_sequence, prune_tree};
pub use stats::{chi2_critical, chi2_statistic, classification_error, partition_distance, smoothed_distribution};

use crate::tagset::Tag;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LearnError {
    #[error("cannot grow a tree from an empty example set")]
    NoExamples,
    #[error("invalid learner parameter: {0}")]
    Params(String),
}

/// Example attribute: a neighbour tag at a signed distance, or the word form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Attribute {
    Left(u8),
    Word,
    Right(u8),
}

impl Attribute {
    /// Signed position relative to the target; `Word` is 0.
    pub fn offset(self) -> i32 {
        match self {
            Attribute::Left(k) => -(k as i32),
            Attribute::Word => 0,
            Attribute::Right(k) => k as i32,
        }
    }

    pub fn parse(s: &str) -> Option<Attribute> {
        if s == "word" {
            return Some(Attribute::Word);
        }
        let (side, k) = if let Some(k) = s.strip_prefix("left") {
            (Attribute::Left as fn(u8) -> Attribute, k)
        } else {
            (Attribute::Right as fn(u8) -> Attribute, s.strip_prefix("right")?)
        };
        let k: u8 = k.parse().ok().filter(|k| *k > 0)?;
        Some(side(k))
    }
}

/// Fixed order: furthest left first, then the word, then the right side.
impl Ord for Attribute {
    fn cmp(&self, other: &Self) -> Ordering {
        self.offset().cmp(&other.offset())
    }
}

impl PartialOrd for Attribute {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Attribute::Left(k) => write!(f, "left{k}"),
            Attribute::Word => write!(f, "word"),
            Attribute::Right(k) => write!(f, "right{k}"),
        }
    }
}

/// Value of an attribute in one example.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AttrValue {
    /// The neighbour position lies outside the sentence.
    Boundary,
    Tag(Tag),
    Word(String),
}

/// Context window: number of neighbours on each side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub left: u8,
    pub right: u8,
}

impl Default for Window {
    fn default() -> Self {
        Self { left: 3, right: 2 }
    }
}

impl Window {
    /// Attributes in the fixed tie-break order.
    pub fn attributes(&self) -> Vec<Attribute> {
        (1..=self.left)
            .rev()
            .map(Attribute::Left)
            .chain(std::iter::once(Attribute::Word))
            .chain((1..=self.right).map(Attribute::Right))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnerParams {
    pub purity_threshold: f64,
    pub min_examples: usize,
    pub chi2_alpha: f64,
    pub holdout_fraction: f64,
    pub window: Window,
    pub top_k_classes: usize,
    pub seed: u64,
}

impl Default for LearnerParams {
    fn default() -> Self {
        Self {
            purity_threshold: 0.99,
            min_examples: 10,
            chi2_alpha: 0.05,
            holdout_fraction: 0.10,
            window: Window::default(),
            top_k_classes: 40,
            seed: 0,
        }
    }
}

impl LearnerParams {
    pub fn validate(&self) -> Result<(), LearnError> {
        let bad = |m: &str| Err(LearnError::Params(m.to_string()));
        if !(self.holdout_fraction > 0.0 && self.holdout_fraction < 1.0) {
            return bad("holdout fraction must lie in (0, 1)");
        }
        if !(self.purity_threshold > 0.5 && self.purity_threshold <= 1.0) {
            return bad("purity threshold must lie in (0.5, 1]");
        }
        if self.min_examples < 1 {
            return bad("min examples must be at least 1");
        }
        if !(self.chi2_alpha > 0.0 && self.chi2_alpha < 1.0) {
            return bad("chi-square significance must lie in (0, 1)");
        }
        Ok(())
    }
}

/// A node of a statistical decision tree. Internal nodes keep the counts
/// and distribution of their examples too, which lets pruning collapse
/// them in place and lets classification stop at a value never seen in
/// training.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeNode {
    /// Label counts indexed like the class tags.
    pub counts: Vec<u64>,
    /// Smoothed distribution over the class tags.
    pub distribution: Vec<f64>,
    pub split: Option<Split>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    pub attribute: Attribute,
    pub branches: Vec<Branch>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub values: BTreeSet<AttrValue>,
    pub child: TreeNode,
}

impl TreeNode {
    pub fn leaf(counts: Vec<u64>) -> Self {
        let n = counts.iter().sum();
        let distribution = smoothed_distribution(&counts, counts.len(), n);
        Self {
            counts,
            distribution,
            split: None,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.split.is_none()
    }

    pub fn n(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Index of the most probable class, lowest index on ties.
    pub fn majority(&self) -> usize {
        let mut best = 0;
        for (i, c) in self.counts.iter().enumerate() {
            if *c > self.counts[best] {
                best = i;
            }
        }
        best
    }

    pub fn children(&self) -> impl Iterator<Item = &TreeNode> {
        self.split.iter().flat_map(|s| s.branches.iter().map(|b| &b.child))
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().map(TreeNode::node_count).sum::<usize>()
    }

    pub fn leaf_count(&self) -> usize {
        if self.is_leaf() {
            1
        } else {
            self.children().map(TreeNode::leaf_count).sum()
        }
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        self.children().map(|c| 1 + c.depth()).max().unwrap_or(0)
    }

    /// Descends as far as the example's values allow.
    pub fn route(&self, values: &[AttrValue], attributes: &[Attribute]) -> &TreeNode {
        let mut node = self;
        while let Some(split) = &node.split {
            let Some(k) = attributes.iter().position(|a| *a == split.attribute) else {
                break;
            };
            match split.branches.iter().find(|b| b.values.contains(&values[k])) {
                Some(b) => node = &b.child,
                None => break,
            }
        }
        node
    }

    pub fn classify(&self, values: &[AttrValue], attributes: &[Attribute]) -> usize {
        self.route(values, attributes).majority()
    }

    pub fn misclassified(&self, examples: &[TrainingExample], attributes: &[Attribute]) -> usize {
        examples
            .iter()
            .filter(|e| self.classify(&e.values, attributes) != e.label)
            .count()
    }

    /// Attributes tested on each root-to-leaf path.
    pub fn paths(&self) -> Vec<Vec<Attribute>> {
        match &self.split {
            None => vec![Vec::new()],
            Some(s) => s
                .branches
                .iter()
                .flat_map(|b| {
                    b.child.paths().into_iter().map(|mut p| {
                        p.insert(0, s.attribute);
                        p
                    })
                })
                .collect(),
        }
    }
}
