//! Tag n-gram statistics: relaxation constraints and bigram transitions.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::constraint::{Constraint, ContextItem, Target, Test};
use crate::corpus::TaggedSentence;
use crate::tagset::{Tag, TagError, TagSet};

/// Reserved first field of the order header line.
pub const ORDER_KEY: &str = "_ORDER_";
/// Reserved first field of sentence-initial tag count lines.
pub const START_KEY: &str = "_START_";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NgramError {
    #[error("n-gram order must be 2 or 3, got {0}")]
    Order(usize),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Tag {
        line: usize,
        #[source]
        source: TagError,
    },
}

/// Counts of consecutive within-sentence tag sequences of one order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NgramTable {
    order: usize,
    counts: BTreeMap<Vec<Tag>, u64>,
    unigrams: BTreeMap<Tag, u64>,
    initial: BTreeMap<Tag, u64>,
}

impl NgramTable {
    pub fn new(order: usize) -> Result<Self, NgramError> {
        if !(2..=3).contains(&order) {
            return Err(NgramError::Order(order));
        }
        Ok(Self {
            order,
            counts: BTreeMap::new(),
            unigrams: BTreeMap::new(),
            initial: BTreeMap::new(),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn counts(&self) -> &BTreeMap<Vec<Tag>, u64> {
        &self.counts
    }

    pub fn count(&self, seq: &[Tag]) -> u64 {
        self.counts.get(seq).copied().unwrap_or(0)
    }

    pub fn unigram(&self, tag: Tag) -> u64 {
        self.unigrams.get(&tag).copied().unwrap_or(0)
    }

    pub fn initial(&self, tag: Tag) -> u64 {
        self.initial.get(&tag).copied().unwrap_or(0)
    }

    pub fn total_tokens(&self) -> u64 {
        self.unigrams.values().sum()
    }

    pub fn total_sentences(&self) -> u64 {
        self.initial.values().sum()
    }

    pub fn total_ngrams(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn add_sentence(&mut self, tags: &[Tag]) {
        if let Some(first) = tags.first() {
            *self.initial.entry(*first).or_insert(0) += 1;
        }
        for t in tags {
            *self.unigrams.entry(*t).or_insert(0) += 1;
        }
        for w in tags.windows(self.order) {
            *self.counts.entry(w.to_vec()).or_insert(0) += 1;
        }
    }

    /// Pointwise mutual information of an observed sequence against the
    /// product of its unigram probabilities, in bits.
    pub fn pmi(&self, seq: &[Tag]) -> Option<f64> {
        let c = self.count(seq);
        if c == 0 {
            return None;
        }
        let p_seq = c as f64 / self.total_ngrams() as f64;
        let n1 = self.total_tokens() as f64;
        let p_indep: f64 = seq.iter().map(|t| self.unigram(*t) as f64 / n1).product();
        Some(pmi(p_seq, p_indep))
    }
}

pub(crate) fn pmi(p_joint: f64, p_independent: f64) -> f64 {
    (p_joint / p_independent).log2()
}

pub fn collect_ngrams(train: &[TaggedSentence], order: usize) -> Result<NgramTable, NgramError> {
    let mut table = NgramTable::new(order)?;
    for s in train {
        table.add_sentence(&s.tags());
    }
    Ok(table)
}

/// One constraint per observed n-gram and anchor position. The anchored
/// tag is the target; the others become single-tag tests at their offsets.
pub fn ngrams_to_constraints(table: &NgramTable) -> Vec<Constraint> {
    let mut out = Vec::with_capacity(table.counts.len() * table.order);
    for seq in table.counts.keys() {
        let compat = table.pmi(seq).expect("observed n-gram");
        for anchor in 0..seq.len() {
            let mut left = Vec::new();
            let mut right = Vec::new();
            for (k, tag) in seq.iter().enumerate() {
                let offset = k as i32 - anchor as i32;
                let item = ContextItem::at(offset, Test::Tags(vec![*tag]));
                match offset {
                    o if o < 0 => left.push(item),
                    o if o > 0 => right.push(item),
                    _ => {}
                }
            }
            out.push(Constraint {
                compatibility: compat,
                target: Target::tag(seq[anchor]),
                left,
                right,
            });
        }
    }
    out
}

/// Add-one smoothed bigram conditionals `p(next | prev)` plus a sentence
/// start row.
#[derive(Clone, Debug, PartialEq)]
pub struct Transitions {
    n_tags: usize,
    start: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

impl Transitions {
    /// Transitions with the same conditional for every history.
    pub fn uniform(n_tags: usize) -> Self {
        let p = 1.0 / n_tags as f64;
        Self {
            n_tags,
            start: vec![p; n_tags],
            rows: vec![vec![p; n_tags]; n_tags],
        }
    }

    pub fn n_tags(&self) -> usize {
        self.n_tags
    }

    /// `p(next | prev)`; `prev = None` is the sentence start state.
    pub fn prob(&self, prev: Option<Tag>, next: Tag) -> f64 {
        match prev {
            None => self.start[next.index()],
            Some(p) => self.rows[p.index()][next.index()],
        }
    }

    pub fn row(&self, prev: Option<Tag>) -> &[f64] {
        match prev {
            None => &self.start,
            Some(p) => &self.rows[p.index()],
        }
    }
}

pub fn transition_probabilities(table: &NgramTable, tagset: &TagSet) -> Result<Transitions, NgramError> {
    if table.order != 2 {
        return Err(NgramError::Order(table.order));
    }
    let n = tagset.len();
    let smooth = |counts: Vec<u64>| -> Vec<f64> {
        let total: u64 = counts.iter().sum();
        let denom = (total + n as u64) as f64;
        counts.into_iter().map(|c| (c + 1) as f64 / denom).collect()
    };
    let start = smooth(tagset.tags().map(|t| table.initial(t)).collect());
    let rows = tagset
        .tags()
        .map(|prev| smooth(tagset.tags().map(|next| table.count(&[prev, next])).collect()))
        .collect();
    Ok(Transitions { n_tags: n, start, rows })
}

/// Serializes the table: an order header, then sentence-start, unigram and
/// n-gram lines sorted lexicographically by their tag fields.
pub fn write_ngram_table(table: &NgramTable, tagset: &TagSet) -> String {
    let mut lines: Vec<(Vec<&str>, u64)> = Vec::new();
    for (t, c) in &table.initial {
        lines.push((vec![START_KEY, tagset.name(*t)], *c));
    }
    for (t, c) in &table.unigrams {
        lines.push((vec![tagset.name(*t)], *c));
    }
    for (seq, c) in &table.counts {
        lines.push((seq.iter().map(|t| tagset.name(*t)).collect(), *c));
    }
    lines.sort();
    let mut out = format!("{ORDER_KEY} {}\n", table.order);
    for (fields, c) in lines {
        let _ = writeln!(out, "{} {c}", fields.join(" "));
    }
    out
}

pub fn parse_ngram_table(text: &str, tagset: &mut TagSet) -> Result<NgramTable, NgramError> {
    let mut table: Option<NgramTable> = None;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let syntax = |message: String| NgramError::Syntax { line: line_no, message };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let Some(table) = table.as_mut() else {
            if fields.len() != 2 || fields[0] != ORDER_KEY {
                return Err(syntax(format!("expected `{ORDER_KEY} <order>` header")));
            }
            let order: usize = fields[1].parse().map_err(|_| syntax("invalid order".into()))?;
            table = Some(NgramTable::new(order)?);
            continue;
        };
        let (count, tags) = fields.split_last().expect("non-empty");
        let count: u64 = count
            .parse()
            .ok()
            .filter(|c| *c > 0)
            .ok_or_else(|| syntax(format!("invalid count {count:?}")))?;
        let mut lookup = |s: &str| {
            tagset
                .insert(s)
                .map_err(|source| NgramError::Tag { line: line_no, source })
        };
        let duplicate = || syntax("duplicate entry".into());
        if tags.first() == Some(&START_KEY) {
            if tags.len() != 2 {
                return Err(syntax("start line must name exactly one tag".into()));
            }
            let t = lookup(tags[1])?;
            if table.initial.insert(t, count).is_some() {
                return Err(duplicate());
            }
        } else if tags.len() == 1 {
            let t = lookup(tags[0])?;
            if table.unigrams.insert(t, count).is_some() {
                return Err(duplicate());
            }
        } else if tags.len() == table.order {
            let seq = tags.iter().map(|s| lookup(s)).collect::<Result<Vec<_>, _>>()?;
            if table.counts.insert(seq, count).is_some() {
                return Err(duplicate());
            }
        } else {
            return Err(syntax(format!(
                "expected 1 or {} tags, found {}",
                table.order,
                tags.len()
            )));
        }
    }
    let table = table.ok_or(NgramError::Syntax {
        line: 0,
        message: "empty n-gram file".into(),
    })?;
    let unseen = table.counts.keys().flatten().find(|t| table.unigram(**t) == 0);
    if let Some(t) = unseen {
        return Err(NgramError::Syntax {
            line: 0,
            message: format!("tag {} occurs in an n-gram but has no unigram count", tagset.name(*t)),
        });
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_tagged_corpus, TagPolicy};

    fn corpus(text: &str) -> (Vec<TaggedSentence>, TagSet) {
        let mut ts = TagSet::new();
        let s = parse_tagged_corpus(text, &mut ts, TagPolicy::Accumulate).unwrap();
        (s, ts)
    }

    fn tags(ts: &TagSet, names: &[&str]) -> Vec<Tag> {
        names.iter().map(|n| ts.lookup(n).unwrap()).collect()
    }

    #[test]
    fn counts_bigrams_and_trigrams() {
        let (s, ts) = corpus("a_DT b_NN c_VB");
        let bi = collect_ngrams(&s, 2).unwrap();
        assert_eq!(bi.counts().len(), 2);
        assert_eq!(bi.count(&tags(&ts, &["DT", "NN"])), 1);
        assert_eq!(bi.count(&tags(&ts, &["NN", "VB"])), 1);
        let tri = collect_ngrams(&s, 3).unwrap();
        assert_eq!(tri.counts().len(), 1);
        assert_eq!(tri.count(&tags(&ts, &["DT", "NN", "VB"])), 1);
    }

    #[test]
    fn duplicate_sentences_double_counts() {
        let (s, ts) = corpus("a_DT b_NN c_VB\na_DT b_NN c_VB");
        let bi = collect_ngrams(&s, 2).unwrap();
        assert_eq!(bi.count(&tags(&ts, &["DT", "NN"])), 2);
        assert_eq!(bi.count(&tags(&ts, &["NN", "VB"])), 2);
    }

    #[test]
    fn no_cross_sentence_ngrams() {
        let (s, ts) = corpus("a_DT\nb_NN");
        let bi = collect_ngrams(&s, 2).unwrap();
        assert!(bi.is_empty());
        assert_eq!(bi.count(&tags(&ts, &["DT", "NN"])), 0);
    }

    #[test]
    fn order_must_be_two_or_three() {
        assert_eq!(collect_ngrams(&[], 4).unwrap_err(), NgramError::Order(4));
        assert!(collect_ngrams(&[], 1).is_err());
    }

    #[test]
    fn pmi_of_always_co_occurring_pair() {
        // p(A) = p(B) = 0.5 and each bigram has probability 0.5.
        let (s, ts) = corpus("x_A y_B\ny_B x_A");
        let bi = collect_ngrams(&s, 2).unwrap();
        assert_eq!(bi.pmi(&tags(&ts, &["A", "B"])), Some(1.0));
        assert_eq!(bi.pmi(&tags(&ts, &["B", "B"])), None);
    }

    #[test]
    fn pmi_of_independent_tags_is_zero() {
        assert_eq!(pmi(0.25, 0.5 * 0.5), 0.0);
    }

    #[test]
    fn constraints_anchor_at_every_position() {
        let (s, ts) = corpus("a_DT b_NN c_VB\nd_DT e_NN");
        let tri = collect_ngrams(&s, 3).unwrap();
        let cs = ngrams_to_constraints(&tri);
        assert_eq!(cs.len(), 3);
        let dt = ts.lookup("DT").unwrap();
        let first = cs.iter().find(|c| c.target.tag == dt).unwrap();
        assert!(first.left.is_empty());
        assert_eq!(
            first.fixed_offsets().unwrap().iter().map(|x| x.0).collect::<Vec<_>>(),
            [1, 2]
        );
        let bi = collect_ngrams(&s, 2).unwrap();
        let cs = ngrams_to_constraints(&bi);
        assert_eq!(cs.len(), bi.counts().len() * 2);
        assert!(cs.iter().all(|c| c.compatibility.is_finite()));
    }

    #[test]
    fn add_one_transitions() {
        let ts = TagSet::from_symbols(["A", "B", "C"]).unwrap();
        let mut table = NgramTable::new(2).unwrap();
        let [a, b, c] = [Tag(0), Tag(1), Tag(2)];
        for _ in 0..3 {
            table.add_sentence(&[a, b]);
        }
        table.add_sentence(&[a, c]);
        let tr = transition_probabilities(&table, &ts).unwrap();
        assert!((tr.prob(Some(a), b) - 4.0 / 7.0).abs() < 1e-15);
        assert!((tr.prob(Some(a), c) - 2.0 / 7.0).abs() < 1e-15);
        // No bigram starts with C: uniform row.
        for t in [a, b, c] {
            assert!((tr.prob(Some(c), t) - 1.0 / 3.0).abs() < 1e-15);
        }
        for prev in [None, Some(a), Some(b), Some(c)] {
            assert!((tr.row(prev).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn transitions_need_bigrams() {
        let ts = TagSet::from_symbols(["A"]).unwrap();
        let t = NgramTable::new(3).unwrap();
        assert_eq!(transition_probabilities(&t, &ts).unwrap_err(), NgramError::Order(3));
    }

    #[test]
    fn file_round_trip() {
        let (s, mut ts) = corpus("a_DT b_NN c_VB\nd_DT e_NN\n,_, x_NN");
        for order in [2, 3] {
            let table = collect_ngrams(&s, order).unwrap();
            let text = write_ngram_table(&table, &ts);
            assert!(text.starts_with(&format!("{ORDER_KEY} {order}\n")));
            let back = parse_ngram_table(&text, &mut ts).unwrap();
            assert_eq!(back, table);
        }
    }

    #[test]
    fn file_errors() {
        let mut ts = TagSet::new();
        assert!(parse_ngram_table("", &mut ts).is_err());
        assert!(parse_ngram_table("A B 3", &mut ts).is_err());
        assert!(parse_ngram_table("_ORDER_ 2\nA B C 1", &mut ts).is_err());
        assert!(parse_ngram_table("_ORDER_ 2\nA 1\nA 2", &mut ts).is_err());
        assert!(parse_ngram_table("_ORDER_ 2\nA 0", &mut ts).is_err());
        assert!(parse_ngram_table("_ORDER_ 2\nA B 1", &mut ts).is_err());
        assert!(parse_ngram_table("_ORDER_ 5", &mut ts).is_err());
    }
}
