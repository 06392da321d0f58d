//! Diagnostic text form of learned trees.
//!
//! ```text
//! {IN RB}
//! (right1 [IN:0.3 RB:0.7; 120]
//!   (RB) [IN:0.01 RB:0.99; 40]
//!   (IN _OUT_) [IN:0.6 RB:0.4; 80])
//! ```
//!
//! Each tree starts with its class tags in braces. A leaf is
//! `[tag:prob ...; n]`; an internal node is `(ATTR [dist; n] (values) child
//! ...)` where values are tags, `_OUT_` or quoted word forms.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use super::{AttrValue, Attribute, Branch, Split, TreeNode};
use crate::tagset::{Tag, TagSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("tree file line {line}: {message}")]
pub struct TreeFileError {
    pub line: usize,
    pub message: String,
}

fn write_dist(out: &mut String, node: &TreeNode, tags: &[Tag], tagset: &TagSet) {
    out.push('[');
    for (i, (t, p)) in tags.iter().zip(&node.distribution).enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{}:{:?}", tagset.name(*t), p);
    }
    let _ = write!(out, "; {}]", node.n());
}

fn write_value(out: &mut String, v: &AttrValue, tagset: &TagSet) {
    match v {
        AttrValue::Boundary => out.push_str(tagset.name(Tag::BOUNDARY)),
        AttrValue::Tag(t) => out.push_str(tagset.name(*t)),
        AttrValue::Word(w) => {
            out.push('"');
            for ch in w.chars() {
                if ch == '"' || ch == '\\' {
                    out.push('\\');
                }
                out.push(ch);
            }
            out.push('"');
        }
    }
}

fn write_node(out: &mut String, node: &TreeNode, tags: &[Tag], tagset: &TagSet, depth: usize) {
    match &node.split {
        None => write_dist(out, node, tags, tagset),
        Some(split) => {
            let _ = write!(out, "({} ", split.attribute);
            write_dist(out, node, tags, tagset);
            for b in &split.branches {
                out.push('\n');
                out.push_str(&"  ".repeat(depth + 1));
                out.push('(');
                for (i, v) in b.values.iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    write_value(out, v, tagset);
                }
                out.push_str(") ");
                write_node(out, &b.child, tags, tagset, depth + 1);
            }
            out.push(')');
        }
    }
}

pub fn write_trees<'a>(trees: impl IntoIterator<Item = (&'a [Tag], &'a TreeNode)>, tagset: &TagSet) -> String {
    let mut out = String::new();
    for (tags, root) in trees {
        out.push('{');
        out.push_str(&tags.iter().map(|t| tagset.name(*t)).collect::<Vec<_>>().join(" "));
        out.push_str("}\n");
        write_node(&mut out, root, tags, tagset, 0);
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open(char),
    Close(char),
    Semi,
    Sym(String),
    Quoted(String),
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, TreeFileError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut chars = text.chars().peekable();
    let err = |line, message: &str| TreeFileError {
        line,
        message: message.to_string(),
    };
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                line += 1;
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '{' | '(' | '[' => {
                out.push((Tok::Open(c), line));
                chars.next();
            }
            '}' | ')' | ']' => {
                out.push((Tok::Close(c), line));
                chars.next();
            }
            ';' => {
                out.push((Tok::Semi, line));
                chars.next();
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        None | Some('\n') => return Err(err(line, "unterminated word literal")),
                        Some('"') => break,
                        Some('\\') => match chars.next() {
                            Some(e @ ('"' | '\\')) => s.push(e),
                            _ => return Err(err(line, "invalid escape")),
                        },
                        Some(ch) => s.push(ch),
                    }
                }
                out.push((Tok::Quoted(s), line));
            }
            _ => {
                let mut s = String::new();
                while let Some(&ch) = chars.peek() {
                    if ch.is_whitespace() || "{}()[];\"".contains(ch) {
                        break;
                    }
                    s.push(ch);
                    chars.next();
                }
                out.push((Tok::Sym(s), line));
            }
        }
    }
    Ok(out)
}

struct Reader<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    tagset: &'a TagSet,
}

impl Reader<'_> {
    fn line(&self) -> usize {
        self.toks.get(self.pos).or_else(|| self.toks.last()).map_or(1, |t| t.1)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, TreeFileError> {
        Err(TreeFileError {
            line: self.line(),
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<(), TreeFileError> {
        match self.next() {
            Some(t) if t == tok => Ok(()),
            other => {
                self.pos -= 1;
                self.err(format!("expected {tok:?}, found {other:?}"))
            }
        }
    }

    fn tag(&self, s: &str) -> Result<Tag, TreeFileError> {
        match self.tagset.get(s) {
            Some(t) => Ok(t),
            None => self.err(format!("tag {s:?} not in tag set")),
        }
    }

    fn dist(&mut self, tags: &[Tag]) -> Result<TreeNode, TreeFileError> {
        self.expect(Tok::Open('['))?;
        let mut probs = Vec::new();
        while let Some(Tok::Sym(s)) = self.peek().cloned() {
            self.pos += 1;
            let Some((name, p)) = s.rsplit_once(':') else {
                return self.err(format!("expected tag:prob, found {s:?}"));
            };
            let tag = self.tag(name)?;
            let p: f64 = match p.parse() {
                Ok(p) if (0.0..=1.0).contains(&p) => p,
                _ => return self.err(format!("invalid probability {p:?}")),
            };
            if tags.get(probs.len()) != Some(&tag) {
                return self.err(format!("distribution entry {name} out of class order"));
            }
            probs.push(p);
        }
        if probs.len() != tags.len() {
            return self.err("distribution does not cover the class tags");
        }
        self.expect(Tok::Semi)?;
        let n: u64 = match self.next() {
            Some(Tok::Sym(s)) => match s.parse() {
                Ok(n) => n,
                Err(_) => return self.err(format!("invalid example count {s:?}")),
            },
            _ => return self.err("expected example count"),
        };
        self.expect(Tok::Close(']'))?;
        // Invert the smoothing to recover integer counts.
        let m = tags.len() as f64;
        let mut counts = Vec::with_capacity(tags.len());
        for p in &probs {
            let c = p * (n as f64 + 1.0) - 1.0 / m;
            let r = c.round();
            if r < 0.0 || (c - r).abs() > 1e-6 {
                return self.err("distribution is not a smoothed count distribution");
            }
            counts.push(r as u64);
        }
        if counts.iter().sum::<u64>() != n {
            return self.err("distribution counts do not add up to the example count");
        }
        let mut node = TreeNode::leaf(counts);
        node.distribution = probs;
        Ok(node)
    }

    fn node(&mut self, tags: &[Tag], depth: usize) -> Result<TreeNode, TreeFileError> {
        if depth > 64 {
            return self.err("tree too deep");
        }
        match self.peek() {
            Some(Tok::Open('[')) => self.dist(tags),
            Some(Tok::Open('(')) => {
                self.pos += 1;
                let attribute = match self.next() {
                    Some(Tok::Sym(s)) => match Attribute::parse(&s) {
                        Some(a) => a,
                        None => return self.err(format!("unknown attribute {s:?}")),
                    },
                    _ => return self.err("expected attribute name"),
                };
                let mut node = self.dist(tags)?;
                let mut branches = Vec::new();
                while self.peek() == Some(&Tok::Open('(')) {
                    self.pos += 1;
                    let mut values = BTreeSet::new();
                    loop {
                        let v = match self.next() {
                            Some(Tok::Close(')')) => break,
                            Some(Tok::Quoted(w)) => AttrValue::Word(w),
                            Some(Tok::Sym(s)) => match self.tag(&s)? {
                                t if t.is_boundary() => AttrValue::Boundary,
                                t => AttrValue::Tag(t),
                            },
                            _ => {
                                self.pos -= 1;
                                return self.err("expected attribute value or ')'");
                            }
                        };
                        values.insert(v);
                    }
                    if values.is_empty() {
                        return self.err("empty value group");
                    }
                    let child = self.node(tags, depth + 1)?;
                    branches.push(Branch { values, child });
                }
                self.expect(Tok::Close(')'))?;
                if branches.is_empty() {
                    return self.err("internal node without branches");
                }
                node.split = Some(Split { attribute, branches });
                Ok(node)
            }
            _ => self.err("expected a tree node"),
        }
    }
}

/// Reads trees written by [`write_trees`]: `(class tags, root)` pairs.
pub fn parse_trees(text: &str, tagset: &TagSet) -> Result<Vec<(Vec<Tag>, TreeNode)>, TreeFileError> {
    let mut r = Reader {
        toks: tokenize(text)?,
        pos: 0,
        tagset,
    };
    let mut out = Vec::new();
    while r.peek().is_some() {
        r.expect(Tok::Open('{'))?;
        let mut tags = Vec::new();
        while let Some(Tok::Sym(s)) = r.peek().cloned() {
            r.pos += 1;
            let t = r.tag(&s)?;
            if t.is_boundary() || tags.contains(&t) {
                return r.err(format!("invalid class tag {s:?}"));
            }
            tags.push(t);
        }
        r.expect(Tok::Close('}'))?;
        if tags.len() < 2 {
            return r.err("an ambiguity class needs at least two tags");
        }
        let root = r.node(&tags, 0)?;
        out.push((tags, root));
    }
    Ok(out)
}
