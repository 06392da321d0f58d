use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{
    build_examples, extract_ambiguity_classes, grow_tree, prune_tree, AmbiguityClass, LearnError, LearnerParams,
    TreeNode,
};
use crate::constraint::{compile_tree, Constraint};
use crate::corpus::TaggedSentence;
use crate::lexicon::Lexicon;
use crate::tagset::TagSet;

#[derive(Clone, Debug, PartialEq)]
pub struct LearnedTree {
    pub class: AmbiguityClass,
    /// Pruned tree. Its root distribution is the class prior.
    pub tree: TreeNode,
    pub unpruned_nodes: usize,
    pub growth_examples: usize,
    pub holdout_examples: usize,
}

impl LearnedTree {
    /// Constraints for this tree, restricted to the class's member words.
    pub fn constraints(&self) -> Vec<Constraint> {
        let words: Vec<String> = self.class.member_words.iter().cloned().collect();
        compile_tree(&self.tree, &self.class.tags, &self.tree.distribution, Some(&words))
    }
}

fn learn_one(
    class: AmbiguityClass,
    rank: usize,
    train: &[TaggedSentence],
    params: &LearnerParams,
) -> Option<LearnedTree> {
    let mut examples = build_examples(&class, train, params.window);
    if examples.len() < params.min_examples.max(2) {
        log::debug!("skipping class with {} examples", examples.len());
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ (rank as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    examples.shuffle(&mut rng);
    let n_hold = ((examples.len() as f64 * params.holdout_fraction).round() as usize).clamp(1, examples.len() - 1);
    let holdout = examples.split_off(examples.len() - n_hold);
    let attrs = params.window.attributes();
    let grown = grow_tree(&examples, &attrs, class.tags.len(), params).ok()?;
    let tree = prune_tree(&grown, &holdout, &attrs);
    Some(LearnedTree {
        class,
        unpruned_nodes: grown.node_count(),
        tree,
        growth_examples: examples.len(),
        holdout_examples: holdout.len(),
    })
}

/// Learns one pruned tree for each of the `top_k_classes` most frequent
/// ambiguity classes. Classes with too few examples are skipped.
pub fn learn_trees(
    train: &[TaggedSentence],
    lex: &Lexicon,
    tagset: &TagSet,
    params: &LearnerParams,
) -> Result<Vec<LearnedTree>, LearnError> {
    params.validate()?;
    let classes: Vec<AmbiguityClass> = extract_ambiguity_classes(train, lex, tagset)
        .into_iter()
        .take(params.top_k_classes)
        .collect();
    Ok(classes
        .into_par_iter()
        .enumerate()
        .filter_map(|(rank, class)| learn_one(class, rank, train, params))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_tagged_corpus, TagPolicy};
    use crate::lexicon::build_lexicon;

    #[test]
    fn learns_context_rule_and_is_deterministic() {
        // "x" is A after D and B after E.
        let mut text = String::new();
        for i in 0..200 {
            if i % 2 == 0 {
                text.push_str("d_D x_A\n");
            } else {
                text.push_str("e_E x_B\n");
            }
        }
        let mut ts = TagSet::new();
        let train = parse_tagged_corpus(&text, &mut ts, TagPolicy::Accumulate).unwrap();
        let lex = build_lexicon(&train);
        let params = LearnerParams::default();
        let trees = learn_trees(&train, &lex, &ts, &params).unwrap();
        assert_eq!(trees.len(), 1);
        let t = &trees[0];
        assert_eq!(t.growth_examples + t.holdout_examples, 200);
        assert_eq!(t.holdout_examples, 20);
        assert!(!t.tree.is_leaf());
        assert_eq!(t.tree.leaf_count(), 2);
        assert_eq!(t.constraints().len(), 4);
        assert_eq!(learn_trees(&train, &lex, &ts, &params).unwrap(), trees);
    }

    #[test]
    fn rare_classes_are_skipped() {
        let mut ts = TagSet::new();
        let train = parse_tagged_corpus("x_A x_B", &mut ts, TagPolicy::Accumulate).unwrap();
        let lex = build_lexicon(&train);
        assert!(learn_trees(&train, &lex, &ts, &LearnerParams::default())
            .unwrap()
            .is_empty());
    }
}
