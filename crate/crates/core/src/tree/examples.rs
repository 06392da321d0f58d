use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{AttrValue, Attribute, Window};
use crate::corpus::TaggedSentence;
use crate::lexicon::Lexicon;
use crate::tagset::{Tag, TagSet};

/// Words sharing the same set of (two or more) possible tags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmbiguityClass {
    /// Sorted by tag id.
    pub tags: Vec<Tag>,
    pub member_words: BTreeSet<String>,
    /// Occurrences of member words in the training corpus.
    pub example_count: usize,
}

impl AmbiguityClass {
    pub fn label_of(&self, tag: Tag) -> Option<usize> {
        self.tags.iter().position(|t| *t == tag)
    }

    pub fn name(&self, tagset: &TagSet) -> String {
        self.tags.iter().map(|t| tagset.name(*t)).collect::<Vec<_>>().join("-")
    }
}

/// One occurrence of a class member: window attribute values and the
/// correct tag as an index into the class tags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrainingExample {
    /// Aligned with [`Window::attributes`].
    pub values: Vec<AttrValue>,
    pub label: usize,
}

/// Classes ranked by example count (descending), ties by tag names.
pub fn extract_ambiguity_classes(train: &[TaggedSentence], lex: &Lexicon, tagset: &TagSet) -> Vec<AmbiguityClass> {
    let mut groups: BTreeMap<Vec<Tag>, BTreeSet<String>> = BTreeMap::new();
    let mut class_of: HashMap<&str, Vec<Tag>> = HashMap::new();
    for (word, entry) in lex.iter() {
        if entry.len() < 2 {
            continue;
        }
        let tags: Vec<Tag> = entry.keys().copied().collect();
        groups.entry(tags.clone()).or_default().insert(word.to_string());
        class_of.insert(word, tags);
    }
    let mut counts: HashMap<&Vec<Tag>, usize> = HashMap::new();
    for tok in train.iter().flat_map(|s| &s.tokens) {
        if let Some(tags) = class_of.get(tok.word.as_str()) {
            *counts.entry(tags).or_insert(0) += 1;
        }
    }
    let mut classes: Vec<AmbiguityClass> = groups
        .iter()
        .map(|(tags, words)| AmbiguityClass {
            tags: tags.clone(),
            member_words: words.clone(),
            example_count: counts.get(tags).copied().unwrap_or(0),
        })
        .collect();
    let names = |c: &AmbiguityClass| c.tags.iter().map(|t| tagset.name(*t).to_string()).collect::<Vec<_>>();
    classes.sort_by(|a, b| {
        b.example_count
            .cmp(&a.example_count)
            .then_with(|| names(a).cmp(&names(b)))
    });
    classes
}

fn neighbour(sentence: &TaggedSentence, i: usize, offset: i32) -> AttrValue {
    usize::try_from(i as i64 + offset as i64)
        .ok()
        .and_then(|p| sentence.tokens.get(p))
        .map_or(AttrValue::Boundary, |t| AttrValue::Tag(t.tag))
}

/// One example per occurrence of a member word whose corpus tag belongs to
/// the class. Neighbour attributes take the corpus tags.
pub fn build_examples(class: &AmbiguityClass, train: &[TaggedSentence], window: Window) -> Vec<TrainingExample> {
    let attrs = window.attributes();
    let mut out = Vec::new();
    for s in train {
        for (i, tok) in s.tokens.iter().enumerate() {
            if !class.member_words.contains(&tok.word) {
                continue;
            }
            let Some(label) = class.label_of(tok.tag) else {
                continue;
            };
            let values = attrs
                .iter()
                .map(|a| match a {
                    Attribute::Word => AttrValue::Word(tok.word.clone()),
                    _ => neighbour(s, i, a.offset()),
                })
                .collect();
            out.push(TrainingExample { values, label });
        }
    }
    out
}
