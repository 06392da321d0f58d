//! Constraint-free reference taggers.

use crate::lexicon::{lexical_distribution, Lexicon};
use crate::ngram::Transitions;
use crate::tagset::{Tag, TagSet};

fn argmax_first(dist: &[(Tag, f64)]) -> Tag {
    let mut best = 0;
    for (k, (_, p)) in dist.iter().enumerate() {
        if *p > dist[best].1 {
            best = k;
        }
    }
    dist[best].0
}

/// Most probable lexical tag per word, ties to tag order. Unknown words get
/// the first open-class tag.
pub fn tag_most_likely(words: &[String], lex: &Lexicon, tagset: &TagSet) -> Vec<Tag> {
    words
        .iter()
        .map(|w| argmax_first(&lexical_distribution(lex, tagset, w)))
        .collect()
}

/// Max-product decoding of `Π p(t_i | t_{i-1}) p_lex(t_i | w_i)` over the
/// candidate tags, in log space. Ties go to the earlier tag.
pub fn tag_viterbi_bigram(words: &[String], lex: &Lexicon, tagset: &TagSet, transitions: &Transitions) -> Vec<Tag> {
    if words.is_empty() {
        return Vec::new();
    }
    let cands: Vec<Vec<(Tag, f64)>> = words.iter().map(|w| lexical_distribution(lex, tagset, w)).collect();
    let mut score: Vec<f64> = cands[0]
        .iter()
        .map(|(t, p)| transitions.prob(None, *t).ln() + p.ln())
        .collect();
    let mut back: Vec<Vec<usize>> = vec![Vec::new()];
    for i in 1..words.len() {
        let mut next = Vec::with_capacity(cands[i].len());
        let mut ptr = Vec::with_capacity(cands[i].len());
        for (t, p) in &cands[i] {
            let mut best = (f64::NEG_INFINITY, 0);
            for (k, (prev, _)) in cands[i - 1].iter().enumerate() {
                let s = score[k] + transitions.prob(Some(*prev), *t).ln();
                if s > best.0 {
                    best = (s, k);
                }
            }
            next.push(best.0 + p.ln());
            ptr.push(best.1);
        }
        score = next;
        back.push(ptr);
    }
    let mut k = 0;
    for (j, s) in score.iter().enumerate() {
        if *s > score[k] {
            k = j;
        }
    }
    let mut out = vec![Tag(0); words.len()];
    for i in (0..words.len()).rev() {
        out[i] = cands[i][k].0;
        if i > 0 {
            k = back[i][k];
        }
    }
    out
}
