use std::collections::BTreeSet;

use proptest::collection::vec;
use proptest::prelude::*;

use relaxtag::baseline::{tag_most_likely, tag_viterbi_bigram};
use relaxtag::constraint::{parse_constraints, serialize_constraints, ConstraintFile};
use relaxtag::corpus::{parse_tagged_corpus, write_tagged_corpus, TagPolicy, TaggedSentence, Token};
use relaxtag::lexicon::{build_lexicon, lexical_distribution, parse_lexicon, write_lexicon};
use relaxtag::ngram::{
    collect_ngrams, ngrams_to_constraints, parse_ngram_table, transition_probabilities, write_ngram_table,
};
use relaxtag::relax::WeightedLabelling;
use relaxtag::tagset::{Tag, TagSet};
use relaxtag::tree::{
    chi2_statistic, grow_tree, merge_branches, parse_trees, partition_distance, prune_tree, smoothed_distribution,
    write_trees, AttrValue, Attribute, LearnerParams, TrainingExample, ValueGroup, Window,
};

const TAGS: [&str; 6] = ["DT", "NN", "VB", "JJ", "IN", ","];
const WORDS: [&str; 8] = ["the", "run", "walk", "as", "big", "of", ",", "light"];

fn tagset() -> TagSet {
    TagSet::from_symbols(TAGS).unwrap()
}

fn sentences() -> impl Strategy<Value = Vec<TaggedSentence>> {
    vec(vec((0..WORDS.len(), 0..TAGS.len() as u16), 1..12), 1..20).prop_map(|ss| {
        ss.into_iter()
            .map(|s| TaggedSentence {
                tokens: s
                    .into_iter()
                    .map(|(w, t)| Token {
                        word: WORDS[w].to_string(),
                        tag: Tag(t),
                    })
                    .collect(),
            })
            .collect()
    })
}

fn examples(n_attrs: usize, n_values: u16, n_labels: usize) -> impl Strategy<Value = Vec<TrainingExample>> {
    vec((vec(0..n_values, n_attrs), 0..n_labels), 1..150).prop_map(|rows| {
        rows.into_iter()
            .map(|(vals, label)| TrainingExample {
                values: vals.into_iter().map(|v| AttrValue::Tag(Tag(v))).collect(),
                label,
            })
            .collect()
    })
}

fn weights() -> impl Strategy<Value = Vec<f64>> {
    vec(0.01f64..1.0, 2..6).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    })
}

proptest! {
    #[test]
    fn smoothing_is_a_distribution(counts in vec(0u64..500, 1..30)) {
        let n = counts.iter().sum();
        let p = smoothed_distribution(&counts, counts.len(), n);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|x| *x > 0.0 && *x < 1.0 || counts.len() == 1));
        for i in 0..counts.len() {
            for j in 0..counts.len() {
                if counts[i] < counts[j] {
                    prop_assert!(p[i] < p[j]);
                }
            }
        }
    }

    #[test]
    fn distance_is_bounded_and_label_invariant(ex in examples(2, 5, 4), perm in Just([2usize, 0, 3, 1])) {
        let refs: Vec<&TrainingExample> = ex.iter().collect();
        let d = partition_distance(&refs, 0);
        prop_assert!((0.0..=1.0).contains(&d));
        let relabelled: Vec<TrainingExample> = ex
            .iter()
            .map(|e| TrainingExample { values: e.values.clone(), label: perm[e.label] })
            .collect();
        let refs2: Vec<&TrainingExample> = relabelled.iter().collect();
        prop_assert!((partition_distance(&refs2, 0) - d).abs() < 1e-12);
    }

    #[test]
    fn attribute_equal_to_label_has_distance_zero(labels in vec(0usize..4, 1..100)) {
        let ex: Vec<TrainingExample> = labels
            .iter()
            .map(|&l| TrainingExample { values: vec![AttrValue::Tag(Tag(l as u16 + 7))], label: l })
            .collect();
        let refs: Vec<&TrainingExample> = ex.iter().collect();
        prop_assert!(partition_distance(&refs, 0).abs() < 1e-12);
    }

    #[test]
    fn chi2_is_symmetric_and_zero_on_equal_rows(a in vec(0u64..200, 2..6), b_seed in vec(0u64..200, 6)) {
        let m = a.len();
        let b: Vec<u64> = b_seed[..m].to_vec();
        prop_assert!((chi2_statistic(&a, &b, m) - chi2_statistic(&b, &a, m)).abs() < 1e-9);
        prop_assert!(chi2_statistic(&a, &a, m).abs() < 1e-9);
        prop_assert!(chi2_statistic(&a, &b, m) >= 0.0);
    }

    #[test]
    fn merging_conserves_values_and_counts(rows in vec(vec(0u64..60, 3), 1..8)) {
        let groups: Vec<ValueGroup> = rows
            .iter()
            .enumerate()
            .map(|(v, c)| ValueGroup { values: BTreeSet::from([AttrValue::Tag(Tag(v as u16))]), counts: c.clone() })
            .collect();
        let out = merge_branches(groups, 0.5, 3, 0.05);
        let values: BTreeSet<AttrValue> = out.iter().flat_map(|g| g.values.iter().cloned()).collect();
        prop_assert_eq!(values.len(), rows.len());
        prop_assert_eq!(out.iter().map(|g| g.values.len()).sum::<usize>(), rows.len());
        let total: Vec<u64> = (0..3).map(|k| rows.iter().map(|r| r[k]).sum()).collect();
        let merged: Vec<u64> = (0..3).map(|k| out.iter().map(|g| g.counts[k]).sum()).collect();
        prop_assert_eq!(total, merged);
    }

    #[test]
    fn pruning_never_hurts_holdout(train in examples(6, 4, 3), holdout in examples(6, 4, 3)) {
        let attrs = Window::default().attributes();
        let params = LearnerParams { min_examples: 4, ..Default::default() };
        let tree = grow_tree(&train, &attrs, 3, &params).unwrap();
        let pruned = prune_tree(&tree, &holdout, &attrs);
        prop_assert!(pruned.node_count() <= tree.node_count());
        prop_assert!(pruned.misclassified(&holdout, &attrs) <= tree.misclassified(&holdout, &attrs));
        prop_assert_eq!(pruned.counts.clone(), tree.counts.clone());
    }

    #[test]
    fn grown_trees_respect_paths_and_counts(train in examples(6, 4, 2)) {
        let attrs = Window::default().attributes();
        let tree = grow_tree(&train, &attrs, 2, &LearnerParams { min_examples: 3, ..Default::default() }).unwrap();
        prop_assert_eq!(tree.n() as usize, train.len());
        for path in tree.paths() {
            let distinct: BTreeSet<Attribute> = path.iter().copied().collect();
            prop_assert_eq!(distinct.len(), path.len());
        }
    }

    #[test]
    fn tree_file_round_trip(train in examples(6, 4, 3)) {
        let attrs = Window::default().attributes();
        let ts = tagset();
        let tree = grow_tree(&train, &attrs, 3, &LearnerParams { min_examples: 3, ..Default::default() }).unwrap();
        let class = [Tag(0), Tag(1), Tag(2)];
        let text = write_trees([(&class[..], &tree)], &ts);
        let back = parse_trees(&text, &ts).unwrap();
        prop_assert_eq!(back.len(), 1);
        prop_assert_eq!(&back[0].0[..], &class[..]);
        prop_assert_eq!(&back[0].1, &tree);
    }

    #[test]
    fn corpus_round_trip(corpus in sentences()) {
        let ts = tagset();
        let text = write_tagged_corpus(&corpus, &ts);
        let mut ts2 = tagset();
        let back = parse_tagged_corpus(&text, &mut ts2, TagPolicy::Validate).unwrap();
        prop_assert_eq!(back, corpus);
    }

    #[test]
    fn lexicon_round_trip(corpus in sentences()) {
        let ts = tagset();
        let lex = build_lexicon(&corpus);
        let mut ts2 = tagset();
        let back = parse_lexicon(&write_lexicon(&lex, &ts), &mut ts2).unwrap();
        prop_assert_eq!(back, lex);
        prop_assert_eq!(ts2, ts);
    }

    #[test]
    fn lexical_distribution_is_normalized(corpus in sentences(), w in 0..WORDS.len()) {
        let lex = build_lexicon(&corpus);
        let d = lexical_distribution(&lex, &tagset(), WORDS[w]);
        prop_assert!(!d.is_empty());
        prop_assert!((d.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(d.windows(2).all(|p| p[0].0 < p[1].0));
    }

    #[test]
    fn ngram_counts_and_constraints(corpus in sentences(), order in 2usize..=3) {
        let table = collect_ngrams(&corpus, order).unwrap();
        let windows: u64 = corpus.iter().map(|s| s.len().saturating_sub(order - 1) as u64).sum();
        prop_assert_eq!(table.total_ngrams(), windows);
        prop_assert_eq!(table.total_tokens(), corpus.iter().map(|s| s.len() as u64).sum::<u64>());
        prop_assert_eq!(ngrams_to_constraints(&table).len(), order * table.counts().len());

        let ts = tagset();
        let mut ts2 = tagset();
        let back = parse_ngram_table(&write_ngram_table(&table, &ts), &mut ts2).unwrap();
        prop_assert_eq!(back, table);
    }

    #[test]
    fn ngram_constraints_survive_serialization(corpus in sentences()) {
        let ts = tagset();
        let table = collect_ngrams(&corpus, 3).unwrap();
        let file = ConstraintFile { constraints: ngrams_to_constraints(&table), ..Default::default() };
        let back = parse_constraints(&serialize_constraints(&file, &ts), &ts).unwrap();
        prop_assert_eq!(back, file);
    }

    #[test]
    fn update_keeps_weights_normalized(ws in vec(weights(), 1..6), seed in vec(-1.0f64..=1.0, 30)) {
        let mut l = WeightedLabelling {
            candidates: ws.iter().map(|w| (0..w.len() as u16).map(Tag).collect()).collect(),
            lexical: ws.clone(),
            weights: ws.clone(),
        };
        let mut k = 0;
        let supports: Vec<Vec<f64>> = ws
            .iter()
            .map(|w| w.iter().map(|_| { k += 1; seed[k % seed.len()] }).collect())
            .collect();
        for _ in 0..5 {
            l.update_step(&supports);
            prop_assert!(l.normalization_deviation() < 1e-9);
            prop_assert!(l.weights.iter().flatten().all(|p| *p >= 0.0));
        }
    }

    #[test]
    fn uniform_support_leaves_weights_unchanged(w in weights(), s in -0.99f64..1.0) {
        let mut l = WeightedLabelling {
            candidates: vec![(0..w.len() as u16).map(Tag).collect()],
            lexical: vec![w.clone()],
            weights: vec![w.clone()],
        };
        let out = l.update_step(&[vec![s; w.len()]]);
        prop_assert!(out.max_change < 1e-12);
        for (a, b) in l.weights[0].iter().zip(&w) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn more_support_means_more_weight(w in weights(), j in 0usize..6, lo in -0.9f64..0.5, delta in 0.01f64..0.4) {
        let j = j % w.len();
        let run = |boost: f64| {
            let mut l = WeightedLabelling {
                candidates: vec![(0..w.len() as u16).map(Tag).collect()],
                lexical: vec![w.clone()],
                weights: vec![w.clone()],
            };
            let mut s = vec![lo; w.len()];
            s[j] += boost;
            l.update_step(&[s]);
            l.weights[0][j]
        };
        prop_assert!(run(delta) > run(0.0));
        prop_assert!(run(delta) > w[j]);
    }

    #[test]
    fn viterbi_matches_brute_force(corpus in sentences(), probe in vec(0..WORDS.len() + 1, 1..6)) {
        let ts = tagset();
        let lex = build_lexicon(&corpus);
        let trans = transition_probabilities(&collect_ngrams(&corpus, 2).unwrap(), &ts).unwrap();
        let words: Vec<String> = probe.iter().map(|&k| WORDS.get(k).copied().unwrap_or("unseen").to_string()).collect();
        let cands: Vec<Vec<(Tag, f64)>> = words.iter().map(|w| lexical_distribution(&lex, &ts, w)).collect();
        let score = |seq: &[Tag]| -> f64 {
            let mut prev = None;
            let mut s = 0.0;
            for (i, t) in seq.iter().enumerate() {
                let p = cands[i].iter().find(|c| c.0 == *t).unwrap().1;
                s += trans.prob(prev, *t).ln() + p.ln();
                prev = Some(*t);
            }
            s
        };
        let mut best = f64::NEG_INFINITY;
        let mut stack = vec![Vec::<Tag>::new()];
        while let Some(seq) = stack.pop() {
            if seq.len() == words.len() {
                best = best.max(score(&seq));
                continue;
            }
            for (t, _) in &cands[seq.len()] {
                let mut next = seq.clone();
                next.push(*t);
                stack.push(next);
            }
        }
        let dp = tag_viterbi_bigram(&words, &lex, &ts, &trans);
        prop_assert!((score(&dp) - best).abs() < 1e-9);
    }

    #[test]
    fn uniform_transitions_reduce_viterbi_to_most_likely(corpus in sentences(), probe in vec(0..WORDS.len(), 1..8)) {
        let ts = tagset();
        let lex = build_lexicon(&corpus);
        let words: Vec<String> = probe.iter().map(|&k| WORDS[k].to_string()).collect();
        let trans = relaxtag::ngram::Transitions::uniform(ts.len());
        prop_assert_eq!(tag_viterbi_bigram(&words, &lex, &ts, &trans), tag_most_likely(&words, &lex, &ts));
    }
}
