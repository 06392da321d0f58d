//! Accuracy reports against a gold standard.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::corpus::TaggedSentence;
use crate::lexicon::Lexicon;
use crate::tagset::{Tag, TagSet};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("sentence count mismatch: {gold} gold, {predicted} predicted")]
    SentenceCount { gold: usize, predicted: usize },
    #[error("sentence {sentence}: {gold} gold tokens, {predicted} predicted")]
    TokenCount {
        sentence: usize,
        gold: usize,
        predicted: usize,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EvalReport {
    pub tokens: usize,
    pub correct: usize,
    pub ambiguous_tokens: usize,
    pub ambiguous_correct: usize,
    /// `(gold, predicted)` error counts.
    pub errors: BTreeMap<(Tag, Tag), usize>,
}

fn pct(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

impl EvalReport {
    /// Percentage.
    pub fn accuracy_overall(&self) -> f64 {
        pct(self.correct, self.tokens)
    }

    /// Percentage over words with two or more candidate tags.
    pub fn accuracy_ambiguous(&self) -> f64 {
        pct(self.ambiguous_correct, self.ambiguous_tokens)
    }

    pub fn error_count(&self) -> usize {
        self.tokens - self.correct
    }

    pub fn merge(&mut self, other: &EvalReport) {
        self.tokens += other.tokens;
        self.correct += other.correct;
        self.ambiguous_tokens += other.ambiguous_tokens;
        self.ambiguous_correct += other.ambiguous_correct;
        for (k, v) in &other.errors {
            *self.errors.entry(*k).or_insert(0) += v;
        }
    }

    /// Most frequent error pairs, largest first, ties by tag order.
    pub fn top_errors(&self, k: usize) -> Vec<((Tag, Tag), usize)> {
        let mut v: Vec<_> = self.errors.iter().map(|(p, c)| (*p, *c)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        v.truncate(k);
        v
    }

    /// `XX/YY count` table: a word tagged YY that should have been XX.
    pub fn error_table(&self, tagset: &TagSet, k: usize) -> String {
        let mut out = String::new();
        for ((g, p), c) in self.top_errors(k) {
            let pair = format!("{}/{}", tagset.name(g), tagset.name(p));
            let _ = writeln!(out, "{pair:<16}{c:>8}");
        }
        out
    }

    /// One machine-readable line.
    pub fn record(&self, model: &str) -> String {
        format!(
            "eval model={model} ambiguous={:.4} overall={:.4} tokens={} ambiguous_tokens={} errors={}",
            self.accuracy_ambiguous(),
            self.accuracy_overall(),
            self.tokens,
            self.ambiguous_tokens,
            self.error_count()
        )
    }
}

/// Aligned `model  ambiguous  overall` table.
pub fn format_accuracy_table(rows: &[(String, EvalReport)]) -> String {
    let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(5);
    let mut out = format!("{:<width$}  {:>9}  {:>9}\n", "model", "ambiguous", "overall");
    for (name, r) in rows {
        let _ = writeln!(
            out,
            "{name:<width$}  {:>8.2}%  {:>8.2}%",
            r.accuracy_ambiguous(),
            r.accuracy_overall()
        );
    }
    out
}

/// Compares predicted tags with the gold corpus. A token is ambiguous when
/// its word has two or more candidate tags (unknown words included).
pub fn evaluate(
    gold: &[TaggedSentence],
    predicted: &[Vec<Tag>],
    lex: &Lexicon,
    tagset: &TagSet,
) -> Result<EvalReport, EvalError> {
    if gold.len() != predicted.len() {
        return Err(EvalError::SentenceCount {
            gold: gold.len(),
            predicted: predicted.len(),
        });
    }
    let mut r = EvalReport::default();
    for (k, (g, p)) in gold.iter().zip(predicted).enumerate() {
        if g.len() != p.len() {
            return Err(EvalError::TokenCount {
                sentence: k,
                gold: g.len(),
                predicted: p.len(),
            });
        }
        for (tok, pred) in g.tokens.iter().zip(p) {
            let ok = tok.tag == *pred;
            r.tokens += 1;
            r.correct += ok as usize;
            if lex.ambiguity(&tok.word, tagset) >= 2 {
                r.ambiguous_tokens += 1;
                r.ambiguous_correct += ok as usize;
            }
            if !ok {
                *r.errors.entry((tok.tag, *pred)).or_insert(0) += 1;
            }
        }
    }
    Ok(r)
}
