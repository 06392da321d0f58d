//! Reader for the constraint file format.
//!
//! ```text
//! file       := (macro | constraint)*
//! macro      := '%' name '%' '=' set ';'
//! constraint := number item* target item* ';'
//! target     := '<' (words ',')? TAG '>'
//! item       := '(' test ')' '+'? | offset ':' test
//! test       := set | '-' set | '-'? '%' name '%' | '"' word '"'
//! set        := '[' TAG+ ']' | words
//! words      := '[' '"' word '"' + ']' | '"' word '"'
//! ```
//!
//! Parenthesized items are positional: on each side they form a chain
//! running outward from the target. A chain without a `+` item is resolved
//! to fixed offsets. `//` starts a comment that runs to the end of the line.

use std::collections::BTreeMap;

use thiserror::Error;

use super::{Constraint, ContextItem, Position, Target, Test};
use crate::tagset::{Tag, TagSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

/// Parsed constraint file: macro table and expanded constraints.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConstraintFile {
    pub macros: BTreeMap<String, Test>,
    pub constraints: Vec<Constraint>,
}

pub fn parse_constraints(text: &str, tagset: &TagSet) -> Result<ConstraintFile, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        text,
        pos: 0,
        line: 1,
        tagset,
        macros: BTreeMap::new(),
    };
    let mut constraints = Vec::new();
    loop {
        p.skip_ws();
        match p.peek() {
            None => break,
            Some(b'%') => p.macro_def()?,
            Some(_) => constraints.push(p.constraint()?),
        }
    }
    Ok(ConstraintFile {
        macros: p.macros,
        constraints,
    })
}

struct Parser<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
    line: usize,
    tagset: &'a TagSet,
    macros: BTreeMap<String, Test>,
}

fn is_delim(b: u8) -> bool {
    b.is_ascii_whitespace() || matches!(b, b'[' | b']' | b'(' | b')' | b'<' | b'>' | b';' | b'"' | b'%')
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            line: self.line,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek_at(&self, k: usize) -> Option<u8> {
        self.src.get(self.pos + k).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
        }
        Some(b)
    }

    fn skip_ws(&mut self) {
        loop {
            match self.peek() {
                Some(b) if b.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'/') if self.peek_at(1) == Some(b'/') => {
                    while !matches!(self.peek(), None | Some(b'\n')) {
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    fn expect(&mut self, b: u8) -> Result<(), ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c == b => {
                self.bump();
                Ok(())
            }
            Some(c) => self.err(format!("expected '{}', found '{}'", b as char, c as char)),
            None => self.err(format!("expected '{}', found end of input", b as char)),
        }
    }

    /// A run of non-delimiter characters (may contain ',' and ':').
    fn symbol(&mut self) -> &'a str {
        let start = self.pos;
        while self.peek().is_some_and(|b| !is_delim(b)) {
            self.bump();
        }
        &self.text[start..self.pos]
    }

    fn name(&mut self) -> Result<String, ParseError> {
        self.expect(b'%')?;
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
        {
            self.bump();
        }
        let name = self.text[start..self.pos].to_string();
        if name.is_empty() {
            return self.err("empty macro name");
        }
        if self.peek() != Some(b'%') {
            return self.err(format!("unterminated macro name %{name}"));
        }
        self.bump();
        Ok(name)
    }

    fn macro_def(&mut self) -> Result<(), ParseError> {
        let line = self.line;
        let name = self.name()?;
        self.expect(b'=')?;
        self.skip_ws();
        let set = self.set()?;
        self.expect(b';')?;
        if self.macros.insert(name.clone(), set).is_some() {
            return Err(ParseError {
                line,
                message: format!("macro %{name}% defined twice"),
            });
        }
        Ok(())
    }

    fn quoted(&mut self) -> Result<String, ParseError> {
        self.expect(b'"')?;
        let mut out = Vec::new();
        loop {
            match self.bump() {
                None | Some(b'\n') => return self.err("unterminated word literal"),
                Some(b'"') => break,
                Some(b'\\') => match self.bump() {
                    Some(c @ (b'"' | b'\\')) => out.push(c),
                    _ => return self.err("invalid escape in word literal"),
                },
                Some(c) => out.push(c),
            }
        }
        let word = String::from_utf8(out).expect("slice of a str split at ASCII bytes");
        if word.is_empty() {
            return self.err("empty word literal");
        }
        Ok(word)
    }

    fn tag(&mut self, sym: &str) -> Result<Tag, ParseError> {
        match self.tagset.get(sym) {
            Some(t) => Ok(t),
            None => self.err(format!("tag {sym:?} not in tag set")),
        }
    }

    /// `[TAG ...]` or `["word" ...]`, positioned at '['.
    fn set(&mut self) -> Result<Test, ParseError> {
        self.expect(b'[')?;
        self.skip_ws();
        if self.peek() == Some(b'"') {
            let mut words = Vec::new();
            loop {
                self.skip_ws();
                match self.peek() {
                    Some(b']') => break,
                    Some(b'"') => words.push(self.quoted()?),
                    _ => return self.err("expected word literal or ']' in word set"),
                }
            }
            self.bump();
            return Ok(Test::Words(words));
        }
        let mut tags = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b']') => break,
                None => return self.err("unbalanced '['"),
                Some(b) if is_delim(b) => {
                    return self.err(format!("unexpected '{}' in tag set", b as char));
                }
                Some(_) => {
                    let sym = self.symbol();
                    tags.push(self.tag(sym)?);
                }
            }
        }
        self.bump();
        if tags.is_empty() {
            return self.err("empty set");
        }
        Ok(Test::Tags(tags))
    }

    fn test(&mut self) -> Result<Test, ParseError> {
        self.skip_ws();
        let negated = self.peek() == Some(b'-');
        if negated {
            self.bump();
        }
        let test = match self.peek() {
            Some(b'[') => self.set()?,
            Some(b'%') => {
                let name = self.name()?;
                match self.macros.get(&name) {
                    Some(t) => t.clone(),
                    None => return self.err(format!("unknown macro %{name}%")),
                }
            }
            Some(b'"') if !negated => Test::Words(vec![self.quoted()?]),
            _ => return self.err("expected a test"),
        };
        Ok(if negated { test.negated() } else { test })
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        self.skip_ws();
        let sym = self.symbol();
        match sym.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => self.err(format!("expected a finite compatibility value, found {sym:?}")),
        }
    }

    fn item(&mut self) -> Result<ContextItem, ParseError> {
        self.skip_ws();
        if self.peek() == Some(b'(') {
            self.bump();
            let test = self.test()?;
            self.expect(b')')?;
            let position = if self.peek() == Some(b'+') {
                self.bump();
                Position::Repeated
            } else {
                Position::Adjacent
            };
            return Ok(ContextItem { test, position });
        }
        let start = self.pos;
        if matches!(self.peek(), Some(b'-' | b'+')) {
            self.bump();
        }
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.bump();
        }
        let digits = &self.text[start..self.pos];
        if self.peek() != Some(b':') {
            return self.err(format!("expected a context item, found {:?}", self.rest_snippet(start)));
        }
        let offset: i32 = match digits.parse() {
            Ok(o) if o != 0 => o,
            _ => return self.err(format!("invalid offset {digits:?}")),
        };
        self.bump();
        let test = self.test()?;
        Ok(ContextItem::at(offset, test))
    }

    fn rest_snippet(&self, start: usize) -> String {
        self.text[start..].chars().take(12).collect()
    }

    fn target(&mut self) -> Result<Target, ParseError> {
        self.expect(b'<')?;
        self.skip_ws();
        let words = match self.peek() {
            Some(b'[') => match self.set()? {
                Test::Words(w) => Some(w),
                _ => return self.err("target word set must contain quoted words"),
            },
            Some(b'"') => Some(vec![self.quoted()?]),
            _ => None,
        };
        if words.is_some() {
            self.expect(b',')?;
        }
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|b| !b.is_ascii_whitespace() && b != b'>') {
            self.bump();
        }
        let sym = &self.text[start..self.pos];
        if sym.is_empty() {
            return self.err("missing target tag");
        }
        let tag = self.tag(sym)?;
        if tag.is_boundary() {
            return self.err("the boundary symbol cannot be a target");
        }
        self.expect(b'>')?;
        Ok(Target { words, tag })
    }

    fn constraint(&mut self) -> Result<Constraint, ParseError> {
        let line = self.line;
        let compatibility = self.number()?;
        let mut left = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'<') => break,
                None => return self.err("missing target"),
                _ => left.push(self.item()?),
            }
        }
        let target = self.target()?;
        let mut right = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b';') => {
                    self.bump();
                    break;
                }
                None => {
                    return Err(ParseError {
                        line,
                        message: "missing ';' at end of constraint".into(),
                    })
                }
                Some(b'<') => return self.err("missing ';' before next constraint"),
                _ => right.push(self.item()?),
            }
        }
        let mut c = Constraint {
            compatibility,
            target,
            left,
            right,
        };
        normalize(&mut c).map_err(|message| ParseError { line, message })?;
        Ok(c)
    }
}

/// Checks repetition placement and resolves repetition-free chains to
/// fixed offsets.
pub(crate) fn normalize(c: &mut Constraint) -> Result<(), String> {
    for (items, dir) in [(&mut c.left, -1i32), (&mut c.right, 1i32)] {
        // Chain members ordered from the target outward.
        let mut chain: Vec<usize> = items
            .iter()
            .enumerate()
            .filter(|(_, it)| !matches!(it.position, Position::Offset(_)))
            .map(|(i, _)| i)
            .collect();
        if dir < 0 {
            chain.reverse();
        }
        let repeated: Vec<bool> = chain.iter().map(|&i| items[i].position == Position::Repeated).collect();
        for (k, &r) in repeated.iter().enumerate() {
            if !r {
                continue;
            }
            let inner_ok = k == 0 || !repeated[k - 1];
            let outer_ok = k + 1 < repeated.len() && !repeated[k + 1];
            if !(inner_ok && outer_ok) {
                return Err(
                    "a repeated item must sit between two positioned items or between a positioned item and the target"
                        .into(),
                );
            }
        }
        if !repeated.iter().any(|r| *r) {
            for (k, &i) in chain.iter().enumerate() {
                items[i].position = Position::Offset(dir * (k as i32 + 1));
            }
        }
    }
    Ok(())
}
