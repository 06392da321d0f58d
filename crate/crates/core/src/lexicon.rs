//! Word → tag frequency lexicon, noise filtering and lexical probabilities.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::corpus::TaggedSentence;
use crate::tagset::{Tag, TagError, TagSet};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LexiconError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Tag {
        line: usize,
        #[source]
        source: TagError,
    },
    #[error("correction for {word:?} references a word missing from the lexicon")]
    UnknownWord { word: String },
    #[error("correction for {word:?} would delete every tag of the word")]
    InvalidCorrection { word: String },
}

/// Per-word tag counts. Every stored count is at least 1 and keys are
/// case sensitive.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: BTreeMap<String, BTreeMap<Tag, u64>>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, word: &str, tag: Tag, count: u64) {
        if count == 0 {
            return;
        }
        *self
            .entries
            .entry(word.to_string())
            .or_default()
            .entry(tag)
            .or_insert(0) += count;
    }

    pub fn entry(&self, word: &str) -> Option<&BTreeMap<Tag, u64>> {
        self.entries.get(word)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn total(&self, word: &str) -> u64 {
        self.entry(word).map_or(0, |e| e.values().sum())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &BTreeMap<Tag, u64>)> {
        self.entries.iter().map(|(w, e)| (w.as_str(), e))
    }

    /// Number of candidate tags for `word`; unknown words get the open class.
    pub fn ambiguity(&self, word: &str, tagset: &TagSet) -> usize {
        self.entry(word).map_or_else(|| tagset.open_class().len(), |e| e.len())
    }
}

pub fn build_lexicon(train: &[TaggedSentence]) -> Lexicon {
    let mut lex = Lexicon::new();
    for tok in train.iter().flat_map(|s| &s.tokens) {
        lex.add(&tok.word, tok.tag, 1);
    }
    lex
}

/// Allowed readings for one word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Correction {
    pub word: String,
    pub allowed: BTreeSet<Tag>,
}

/// Deletes, for every corrected word, the tags outside its allowed set.
pub fn filter_lexicon(lex: &Lexicon, corrections: &[Correction]) -> Result<Lexicon, LexiconError> {
    let mut out = lex.clone();
    for c in corrections {
        let entry = out
            .entries
            .get_mut(&c.word)
            .ok_or_else(|| LexiconError::UnknownWord { word: c.word.clone() })?;
        if !entry.keys().any(|t| c.allowed.contains(t)) {
            return Err(LexiconError::InvalidCorrection { word: c.word.clone() });
        }
        entry.retain(|t, _| c.allowed.contains(t));
    }
    Ok(out)
}

/// Candidate tags of `word` with their lexical probabilities, in tag order.
///
/// Known words get relative frequencies; unknown words a uniform
/// distribution over the open class.
pub fn lexical_distribution(lex: &Lexicon, tagset: &TagSet, word: &str) -> Vec<(Tag, f64)> {
    match lex.entry(word) {
        Some(entry) => {
            let total: u64 = entry.values().sum();
            entry.iter().map(|(t, c)| (*t, *c as f64 / total as f64)).collect()
        }
        None => {
            let open = tagset.open_class();
            let p = 1.0 / open.len() as f64;
            open.into_iter().map(|t| (t, p)).collect()
        }
    }
}

/// Writes `word TAG count TAG count ...`, one word per line, tags sorted by name.
pub fn write_lexicon(lex: &Lexicon, tagset: &TagSet) -> String {
    let mut out = String::new();
    for (word, entry) in lex.iter() {
        let mut tags: Vec<(&str, u64)> = entry.iter().map(|(t, c)| (tagset.name(*t), *c)).collect();
        tags.sort();
        out.push_str(word);
        for (name, count) in tags {
            let _ = write!(out, " {name} {count}");
        }
        out.push('\n');
    }
    out
}

pub fn parse_lexicon(text: &str, tagset: &mut TagSet) -> Result<Lexicon, LexiconError> {
    let mut lex = Lexicon::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let Some((word, rest)) = fields.split_first() else {
            continue;
        };
        if rest.is_empty() || rest.len() % 2 != 0 {
            return Err(LexiconError::Syntax {
                line: line_no,
                message: "expected `word TAG count [TAG count ...]`".into(),
            });
        }
        if lex.contains(word) {
            return Err(LexiconError::Syntax {
                line: line_no,
                message: format!("duplicate entry for {word:?}"),
            });
        }
        for pair in rest.chunks(2) {
            let tag = tagset
                .insert(pair[0])
                .map_err(|source| LexiconError::Tag { line: line_no, source })?;
            let count: u64 = pair[1].parse().map_err(|_| LexiconError::Syntax {
                line: line_no,
                message: format!("invalid count {:?}", pair[1]),
            })?;
            if count == 0 {
                return Err(LexiconError::Syntax {
                    line: line_no,
                    message: "counts must be at least 1".into(),
                });
            }
            if lex.entry(word).is_some_and(|e| e.contains_key(&tag)) {
                return Err(LexiconError::Syntax {
                    line: line_no,
                    message: format!("tag {} repeated", pair[0]),
                });
            }
            lex.add(word, tag, count);
        }
    }
    Ok(lex)
}

/// Reads `word TAG [TAG ...]` lines. Tags must already be in the tag set.
pub fn parse_corrections(text: &str, tagset: &TagSet) -> Result<Vec<Correction>, LexiconError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let Some((word, tags)) = fields.split_first() else {
            continue;
        };
        if tags.is_empty() {
            return Err(LexiconError::Syntax {
                line: i + 1,
                message: "expected `word TAG [TAG ...]`".into(),
            });
        }
        let allowed = tags
            .iter()
            .map(|t| match tagset.get(t) {
                Some(tag) if !tag.is_boundary() => Ok(tag),
                _ => Err(LexiconError::Tag {
                    line: i + 1,
                    source: TagError::Unknown(t.to_string()),
                }),
            })
            .collect::<Result<_, _>>()?;
        out.push(Correction {
            word: word.to_string(),
            allowed,
        });
    }
    Ok(out)
}
