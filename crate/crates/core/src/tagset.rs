//! Tag inventory and tag identifiers.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Interned tag identifier. The numeric order is the tag set's insertion
/// order and is used for every deterministic tie break.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag(pub u16);

impl Tag {
    /// Pseudo tag standing for a position outside the sentence.
    pub const BOUNDARY: Tag = Tag(u16::MAX);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_boundary(self) -> bool {
        self == Tag::BOUNDARY
    }
}

/// Printed name of [`Tag::BOUNDARY`]. Tags read from a corpus never contain
/// an underscore, so this cannot collide with a real tag.
pub const BOUNDARY_SYMBOL: &str = "_OUT_";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TagError {
    #[error("invalid tag symbol {0:?}")]
    InvalidSymbol(String),
    #[error("unknown tag {0:?}")]
    Unknown(String),
    #[error("tag set is full")]
    Full,
}

/// Ordered set of distinct tag symbols plus the subset assignable to
/// unknown words.
#[derive(Clone, Debug, Default)]
pub struct TagSet {
    names: Vec<String>,
    index: HashMap<String, Tag>,
    open_class: Option<Vec<Tag>>,
}

impl PartialEq for TagSet {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.open_class() == other.open_class()
    }
}

impl TagSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_symbols<I, S>(symbols: I) -> Result<Self, TagError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = TagSet::new();
        for s in symbols {
            set.insert(s.as_ref())?;
        }
        Ok(set)
    }

    pub fn valid_symbol(symbol: &str) -> bool {
        !symbol.is_empty() && !symbol.contains('_') && !symbol.chars().any(char::is_whitespace)
    }

    /// Returns the id of `symbol`, adding it when absent.
    pub fn insert(&mut self, symbol: &str) -> Result<Tag, TagError> {
        if let Some(&t) = self.index.get(symbol) {
            return Ok(t);
        }
        if !Self::valid_symbol(symbol) {
            return Err(TagError::InvalidSymbol(symbol.to_string()));
        }
        if self.names.len() >= u16::MAX as usize {
            return Err(TagError::Full);
        }
        let tag = Tag(self.names.len() as u16);
        self.names.push(symbol.to_string());
        self.index.insert(symbol.to_string(), tag);
        Ok(tag)
    }

    /// Looks a symbol up, accepting the boundary pseudo tag.
    pub fn get(&self, symbol: &str) -> Option<Tag> {
        if symbol == BOUNDARY_SYMBOL {
            return Some(Tag::BOUNDARY);
        }
        self.index.get(symbol).copied()
    }

    pub fn lookup(&self, symbol: &str) -> Result<Tag, TagError> {
        self.get(symbol).ok_or_else(|| TagError::Unknown(symbol.to_string()))
    }

    pub fn name(&self, tag: Tag) -> &str {
        if tag.is_boundary() {
            BOUNDARY_SYMBOL
        } else {
            &self.names[tag.index()]
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn tags(&self) -> impl Iterator<Item = Tag> + '_ {
        (0..self.names.len()).map(|i| Tag(i as u16))
    }

    pub fn contains(&self, tag: Tag) -> bool {
        tag.index() < self.names.len()
    }

    /// Restricts the unknown-word candidates to `tags`.
    pub fn set_open_class(&mut self, tags: Vec<Tag>) {
        let mut tags: Vec<Tag> = tags.into_iter().filter(|t| self.contains(*t)).collect();
        tags.sort();
        tags.dedup();
        self.open_class = Some(tags);
    }

    /// Tags assignable to unknown words, in tag order.
    ///
    /// Unless set explicitly this is every tag containing an alphanumeric
    /// character (punctuation tags such as `,` or `:` are excluded). If that
    /// leaves nothing, all tags are returned.
    pub fn open_class(&self) -> Vec<Tag> {
        if let Some(tags) = &self.open_class {
            if !tags.is_empty() {
                return tags.clone();
            }
        }
        let open: Vec<Tag> = self
            .tags()
            .filter(|t| self.name(*t).chars().any(char::is_alphanumeric))
            .collect();
        if open.is_empty() {
            self.tags().collect()
        } else {
            open
        }
    }
}

impl fmt::Display for TagSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.names.join(" "))
    }
}
