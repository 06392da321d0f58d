//! Weighted context constraints shared by every model source.
//!
//! A constraint states how compatible a target `(word forms, tag)` pair is
//! with a context pattern. The compatibility is a signed real: positive
//! values support the target tag in that context, negative values
//! penalize it.

mod compile;
mod instantiate;
mod parse;
mod write;

use std::collections::HashMap;

pub use compile::compile_tree;
pub use instantiate::{instantiate, Factor, Lattice};
pub use parse::{parse_constraints, ConstraintFile, ParseError};
pub use write::{serialize_constraints, write_constraint};

use crate::tagset::Tag;

/// A single-position test.
#[derive(Clone, Debug, PartialEq)]
pub enum Test {
    /// The position carries one of these tags.
    Tags(Vec<Tag>),
    /// The position carries none of these tags.
    NotTags(Vec<Tag>),
    /// The word form is one of these.
    Words(Vec<String>),
    /// The word form is none of these.
    NotWords(Vec<String>),
}

impl Test {
    pub fn negated(self) -> Test {
        match self {
            Test::Tags(t) => Test::NotTags(t),
            Test::NotTags(t) => Test::Tags(t),
            Test::Words(w) => Test::NotWords(w),
            Test::NotWords(w) => Test::Words(w),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Position {
    /// Signed distance from the target; never 0.
    Offset(i32),
    /// Next position of a chain that crosses a repeated span.
    Adjacent,
    /// Zero or more contiguous positions between the neighbouring chain
    /// items (or the target).
    Repeated,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContextItem {
    pub test: Test,
    pub position: Position,
}

impl ContextItem {
    pub fn at(offset: i32, test: Test) -> Self {
        Self {
            test,
            position: Position::Offset(offset),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Target {
    /// When present the constraint only applies to these word forms.
    pub words: Option<Vec<String>>,
    pub tag: Tag,
}

impl Target {
    pub fn tag(tag: Tag) -> Self {
        Self { words: None, tag }
    }

    pub fn matches(&self, word: &str, tag: Tag) -> bool {
        self.tag == tag && self.words.as_ref().is_none_or(|ws| ws.iter().any(|w| w == word))
    }
}

/// Context items are kept in source order on each side of the target.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub compatibility: f64,
    pub target: Target,
    pub left: Vec<ContextItem>,
    pub right: Vec<ContextItem>,
}

impl Constraint {
    pub fn context(&self) -> impl Iterator<Item = &ContextItem> {
        self.left.iter().chain(&self.right)
    }

    pub fn has_repetition(&self) -> bool {
        self.context().any(|c| c.position == Position::Repeated)
    }

    /// `(offset, test)` pairs sorted by offset, when every item has a fixed
    /// offset.
    pub fn fixed_offsets(&self) -> Option<Vec<(i32, &Test)>> {
        let mut out: Vec<(i32, &Test)> = self
            .context()
            .map(|c| match c.position {
                Position::Offset(o) => Some((o, &c.test)),
                _ => None,
            })
            .collect::<Option<_>>()?;
        out.sort_by_key(|x| x.0);
        Some(out)
    }
}

/// Where a constraint came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Source {
    Learned,
    Bigram,
    Trigram,
    HandWritten,
}

/// Constraints indexed by target tag.
#[derive(Clone, Debug, Default)]
pub struct ConstraintSet {
    constraints: Vec<(Constraint, Source)>,
    by_tag: HashMap<Tag, Vec<usize>>,
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_constraints(constraints: impl IntoIterator<Item = Constraint>, source: Source) -> Self {
        let mut set = Self::new();
        set.extend(constraints, source);
        set
    }

    pub fn push(&mut self, c: Constraint, source: Source) {
        self.by_tag
            .entry(c.target.tag)
            .or_default()
            .push(self.constraints.len());
        self.constraints.push((c, source));
    }

    pub fn extend(&mut self, constraints: impl IntoIterator<Item = Constraint>, source: Source) {
        for c in constraints {
            self.push(c, source);
        }
    }

    /// Union with another set.
    pub fn join(&mut self, other: &ConstraintSet) {
        for (c, s) in &other.constraints {
            self.push(c.clone(), *s);
        }
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Constraint, Source)> {
        self.constraints.iter().map(|(c, s)| (c, *s))
    }

    /// Constraints whose target matches `(word, tag)`.
    pub fn lookup<'a>(&'a self, word: &'a str, tag: Tag) -> impl Iterator<Item = &'a Constraint> + 'a {
        self.by_tag
            .get(&tag)
            .into_iter()
            .flatten()
            .map(|&i| &self.constraints[i].0)
            .filter(move |c| c.target.matches(word, tag))
    }
}
