use super::{Constraint, ContextItem, Target, Test};
use crate::tagset::Tag;
use crate::tree::{AttrValue, Attribute, TreeNode};

#[derive(Default, Clone)]
struct PathTests {
    /// `(offset, test)` for each neighbour attribute on the path.
    items: Vec<(i32, Test)>,
    words: Option<Vec<String>>,
}

fn value_test(values: &std::collections::BTreeSet<AttrValue>) -> Test {
    Test::Tags(
        values
            .iter()
            .filter_map(|v| match v {
                AttrValue::Boundary => Some(Tag::BOUNDARY),
                AttrValue::Tag(t) => Some(*t),
                AttrValue::Word(_) => None,
            })
            .collect(),
    )
}

fn walk(node: &TreeNode, path: &PathTests, emit: &mut dyn FnMut(&TreeNode, &PathTests)) {
    let Some(split) = &node.split else {
        emit(node, path);
        return;
    };
    for b in &split.branches {
        let mut p = path.clone();
        match split.attribute {
            Attribute::Word => {
                p.words = Some(
                    b.values
                        .iter()
                        .filter_map(|v| match v {
                            AttrValue::Word(w) => Some(w.clone()),
                            _ => None,
                        })
                        .collect(),
                );
            }
            a => p.items.push((a.offset(), value_test(&b.values))),
        }
        walk(&b.child, &p, emit);
    }
}

/// One constraint per leaf and class tag. Neighbour tests become tag sets at
/// fixed offsets, a word test becomes the target word set, and the
/// compatibility is `log2(p_leaf(t) / prior(t))`.
///
/// Paths without a word test apply to `default_words` when given, otherwise
/// to every word.
pub fn compile_tree(tree: &TreeNode, tags: &[Tag], prior: &[f64], default_words: Option<&[String]>) -> Vec<Constraint> {
    let mut out = Vec::new();
    walk(tree, &PathTests::default(), &mut |leaf, path| {
        let mut items = path.items.clone();
        items.sort_by_key(|(o, _)| *o);
        let (left, right): (Vec<_>, Vec<_>) = items.into_iter().partition(|(o, _)| *o < 0);
        let words = path.words.clone().or_else(|| default_words.map(<[String]>::to_vec));
        for (i, &tag) in tags.iter().enumerate() {
            out.push(Constraint {
                compatibility: (leaf.distribution[i] / prior[i]).log2(),
                target: Target {
                    words: words.clone(),
                    tag,
                },
                left: left.iter().map(|(o, t)| ContextItem::at(*o, t.clone())).collect(),
                right: right.iter().map(|(o, t)| ContextItem::at(*o, t.clone())).collect(),
            });
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::constraint::{write_constraint, Position};
    use crate::tagset::TagSet;
    use crate::tree::{Branch, Split};

    #[test]
    fn leaf_equal_to_prior_gives_zero() {
        let leaf = TreeNode::leaf(vec![3, 1]);
        let cs = compile_tree(&leaf, &[Tag(0), Tag(1)], &leaf.distribution.clone(), None);
        assert_eq!(cs.len(), 2);
        assert!(cs.iter().all(|c| c.compatibility == 0.0 && c.context().count() == 0));
    }

    #[test]
    fn doubled_probability_gives_one() {
        let leaf = TreeNode::leaf(vec![3, 1]);
        let prior: Vec<f64> = leaf.distribution.iter().map(|p| p / 2.0).collect();
        let cs = compile_tree(&leaf, &[Tag(0), Tag(1)], &prior, None);
        assert!(cs.iter().all(|c| c.compatibility == 1.0));
    }

    #[test]
    fn display_form_of_word_and_neighbour_path() {
        let ts = TagSet::from_symbols(["IN", "RB"]).unwrap();
        let (inn, rb) = (ts.lookup("IN").unwrap(), ts.lookup("RB").unwrap());
        let deep = {
            let mut n = TreeNode::leaf(vec![1, 30]);
            n.split = Some(Split {
                attribute: Attribute::Right(2),
                branches: vec![
                    Branch {
                        values: BTreeSet::from([AttrValue::Tag(inn)]),
                        child: TreeNode::leaf(vec![0, 20]),
                    },
                    Branch {
                        values: BTreeSet::from([AttrValue::Tag(rb), AttrValue::Boundary]),
                        child: TreeNode::leaf(vec![1, 10]),
                    },
                ],
            });
            n
        };
        let mid = {
            let mut n = TreeNode::leaf(vec![1, 30]);
            n.split = Some(Split {
                attribute: Attribute::Right(1),
                branches: vec![Branch {
                    values: BTreeSet::from([AttrValue::Tag(rb)]),
                    child: deep,
                }],
            });
            n
        };
        let mut root = TreeNode::leaf(vec![50, 40]);
        root.split = Some(Split {
            attribute: Attribute::Word,
            branches: vec![
                Branch {
                    values: BTreeSet::from([AttrValue::Word("as".into()), AttrValue::Word("As".into())]),
                    child: mid,
                },
                Branch {
                    values: BTreeSet::from([AttrValue::Word("once".into())]),
                    child: TreeNode::leaf(vec![49, 10]),
                },
            ],
        });
        let prior = root.distribution.clone();
        let cs = compile_tree(&root, &[inn, rb], &prior, Some(&["ignored".to_string()]));
        assert_eq!(cs.len(), 2 * root.leaf_count());
        let first = write_constraint(&cs[0], &ts);
        assert!(first.ends_with(r#"<["As" "as"],IN> 1:[RB] 2:[IN];"#), "{first}");
        assert!(cs[0].compatibility < 0.0 && cs[1].compatibility > 0.0);
        assert!(matches!(cs[2].right[1].test, Test::Tags(ref t) if t.contains(&Tag::BOUNDARY)));
        assert_eq!(cs[2].right[1].position, Position::Offset(2));
        assert_eq!(cs[4].target.words.as_deref(), Some(&["once".to_string()][..]));
    }

    #[test]
    fn default_words_apply_without_word_test() {
        let leaf = TreeNode::leaf(vec![3, 1]);
        let words = vec!["a".to_string(), "b".to_string()];
        let cs = compile_tree(&leaf, &[Tag(0), Tag(1)], &[0.5, 0.5], Some(&words));
        assert_eq!(cs[0].target.words.as_ref(), Some(&words));
    }
}
