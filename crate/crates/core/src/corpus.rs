//! Annotated corpus reading, writing, splitting and statistics.
//!
//! The corpus format is one sentence per line with whitespace separated
//! `word_TAG` tokens. A token is split at its last underscore, so word
//! forms may themselves contain underscores.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::lexicon::Lexicon;
use crate::tagset::{Tag, TagError, TagSet};

#[derive(Debug, Error, PartialEq)]
pub enum CorpusError {
    #[error("line {line}, column {column}: malformed token {text:?} (token {token}), expected word_TAG")]
    MalformedToken {
        line: usize,
        column: usize,
        token: usize,
        text: String,
    },
    #[error("line {line}, column {column}: {source}")]
    Tag {
        line: usize,
        column: usize,
        #[source]
        source: TagError,
    },
    #[error("split fractions must be positive and sum to 1, got {0:?}")]
    InvalidFractions((f64, f64, f64)),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub word: String,
    pub tag: Tag,
}

/// A non-empty sequence of tagged tokens.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaggedSentence {
    pub tokens: Vec<Token>,
}

impl TaggedSentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn words(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.word.as_str()).collect()
    }

    pub fn tags(&self) -> Vec<Tag> {
        self.tokens.iter().map(|t| t.tag).collect()
    }
}

/// How tags found in the input relate to the supplied tag set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TagPolicy {
    /// Unseen tags are added to the tag set.
    Accumulate,
    /// Unseen tags are an error.
    Validate,
}

/// Parses a tagged corpus. Blank lines are skipped.
pub fn parse_tagged_corpus(
    text: &str,
    tagset: &mut TagSet,
    policy: TagPolicy,
) -> Result<Vec<TaggedSentence>, CorpusError> {
    let mut sentences = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let mut tokens = Vec::new();
        for (tokno, (column, raw)) in split_with_columns(line).enumerate() {
            let malformed = || CorpusError::MalformedToken {
                line: lineno + 1,
                column,
                token: tokno + 1,
                text: raw.to_string(),
            };
            let (word, tag) = raw.rsplit_once('_').ok_or_else(malformed)?;
            if word.is_empty() || tag.is_empty() {
                return Err(malformed());
            }
            let tag = match policy {
                TagPolicy::Accumulate => tagset.insert(tag),
                TagPolicy::Validate => tagset
                    .get(tag)
                    .filter(|t| !t.is_boundary())
                    .ok_or_else(|| TagError::Unknown(tag.to_string())),
            }
            .map_err(|source| CorpusError::Tag {
                line: lineno + 1,
                column: column + word.chars().count() + 1,
                source,
            })?;
            tokens.push(Token {
                word: word.to_string(),
                tag,
            });
        }
        if !tokens.is_empty() {
            sentences.push(TaggedSentence { tokens });
        }
    }
    Ok(sentences)
}

/// Splits untagged text into sentences of word forms, one per non-blank line.
pub fn parse_untagged(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split_whitespace().map(str::to_string).collect::<Vec<_>>())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Whitespace-separated fields with their 1-based character columns.
pub(crate) fn split_with_columns(line: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut rest = line;
    let mut offset = 0;
    std::iter::from_fn(move || {
        let trimmed = rest.trim_start();
        offset += rest.len() - trimmed.len();
        if trimmed.is_empty() {
            return None;
        }
        let end = trimmed.find(char::is_whitespace).unwrap_or(trimmed.len());
        let start = offset;
        let field = &trimmed[..end];
        rest = &trimmed[end..];
        offset += end;
        Some((line[..start].chars().count() + 1, field))
    })
}

pub fn write_tagged_corpus(sentences: &[TaggedSentence], tagset: &TagSet) -> String {
    let mut out = String::new();
    for s in sentences {
        let mut first = true;
        for t in &s.tokens {
            if !first {
                out.push(' ');
            }
            first = false;
            let _ = write!(out, "{}_{}", t.word, tagset.name(t.tag));
        }
        out.push('\n');
    }
    out
}

/// Train, tune and test partitions of a corpus.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<TaggedSentence>,
    pub tune: Vec<TaggedSentence>,
    pub test: Vec<TaggedSentence>,
}

/// Partitions sentences at random (seeded) into three disjoint parts whose
/// sizes follow `fractions`. Sentences keep their original relative order
/// inside each part.
pub fn split_corpus(sentences: &[TaggedSentence], fractions: (f64, f64, f64), seed: u64) -> Result<Split, CorpusError> {
    let (ftrain, ftune, ftest) = fractions;
    let valid = [ftrain, ftune, ftest].iter().all(|f| f.is_finite() && *f > 0.0)
        && ((ftrain + ftune + ftest) - 1.0).abs() < 1e-9;
    if !valid {
        return Err(CorpusError::InvalidFractions(fractions));
    }
    let n = sentences.len();
    let n_train = ((n as f64) * ftrain).round() as usize;
    let n_tune = (((n as f64) * ftune).round() as usize).min(n - n_train.min(n));
    let n_train = n_train.min(n);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut part = vec![2u8; n];
    for &i in &order[..n_train] {
        part[i] = 0;
    }
    for &i in &order[n_train..n_train + n_tune] {
        part[i] = 1;
    }
    let mut split = Split::default();
    for (s, p) in sentences.iter().zip(part) {
        match p {
            0 => split.train.push(s.clone()),
            1 => split.tune.push(s.clone()),
            _ => split.test.push(s.clone()),
        }
    }
    for (name, v) in [("train", &split.train), ("tune", &split.tune), ("test", &split.test)] {
        if v.is_empty() {
            log::warn!("{name} split is empty ({n} sentences, fractions {fractions:?})");
        }
    }
    Ok(split)
}

/// Token-level ambiguity figures for a corpus under a lexicon.
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusStats {
    pub word_count: usize,
    pub ambiguous_fraction: f64,
    pub ambiguity_ratio_ambiguous: f64,
    pub ambiguity_ratio_overall: f64,
}

/// Unknown words count with the size of the open class.
pub fn corpus_stats(sentences: &[TaggedSentence], lex: &Lexicon, tagset: &TagSet) -> CorpusStats {
    let open = tagset.open_class().len();
    let mut words = 0usize;
    let mut ambiguous = 0usize;
    let mut tags_all = 0usize;
    let mut tags_ambiguous = 0usize;
    for t in sentences.iter().flat_map(|s| &s.tokens) {
        let k = lex.entry(&t.word).map_or(open, |e| e.len());
        words += 1;
        tags_all += k;
        if k >= 2 {
            ambiguous += 1;
            tags_ambiguous += k;
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    CorpusStats {
        word_count: words,
        ambiguous_fraction: ratio(ambiguous, words),
        ambiguity_ratio_ambiguous: ratio(tags_ambiguous, ambiguous),
        ambiguity_ratio_overall: ratio(tags_all, words),
    }
}
