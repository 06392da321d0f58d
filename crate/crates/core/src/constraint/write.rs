use std::fmt::Write as _;

use super::parse::ConstraintFile;
use super::{Constraint, ContextItem, Position, Test};
use crate::tagset::{Tag, TagSet};

fn quote(out: &mut String, word: &str) {
    out.push('"');
    for ch in word.chars() {
        if ch == '"' || ch == '\\' {
            out.push('\\');
        }
        out.push(ch);
    }
    out.push('"');
}

fn write_tags(out: &mut String, tags: &[Tag], tagset: &TagSet) {
    out.push('[');
    for (i, t) in tags.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(tagset.name(*t));
    }
    out.push(']');
}

fn write_words(out: &mut String, words: &[String]) {
    out.push('[');
    for (i, w) in words.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        quote(out, w);
    }
    out.push(']');
}

fn write_test(out: &mut String, test: &Test, tagset: &TagSet) {
    match test {
        Test::Tags(t) => write_tags(out, t, tagset),
        Test::NotTags(t) => {
            out.push('-');
            write_tags(out, t, tagset);
        }
        Test::Words(w) if w.len() == 1 => quote(out, &w[0]),
        Test::Words(w) => write_words(out, w),
        Test::NotWords(w) => {
            out.push('-');
            write_words(out, w);
        }
    }
}

fn write_item(out: &mut String, item: &ContextItem, tagset: &TagSet) {
    match item.position {
        Position::Offset(o) => {
            let _ = write!(out, "{o}:");
            write_test(out, &item.test, tagset);
        }
        Position::Adjacent | Position::Repeated => {
            out.push('(');
            write_test(out, &item.test, tagset);
            out.push(')');
            if item.position == Position::Repeated {
                out.push('+');
            }
        }
    }
}

/// One constraint on one line, compatibility printed with full precision.
pub fn write_constraint(c: &Constraint, tagset: &TagSet) -> String {
    let mut out = format!("{:?}", c.compatibility);
    for item in &c.left {
        out.push(' ');
        write_item(&mut out, item, tagset);
    }
    out.push_str(" <");
    if let Some(words) = &c.target.words {
        write_words(&mut out, words);
        out.push(',');
    }
    out.push_str(tagset.name(c.target.tag));
    out.push('>');
    for item in &c.right {
        out.push(' ');
        write_item(&mut out, item, tagset);
    }
    out.push(';');
    out
}

/// Canonical text: macro definitions, then one constraint per line.
pub fn serialize_constraints(file: &ConstraintFile, tagset: &TagSet) -> String {
    let mut out = String::new();
    for (name, set) in &file.macros {
        let _ = write!(out, "%{name}% = ");
        match set {
            Test::Tags(t) | Test::NotTags(t) => write_tags(&mut out, t, tagset),
            Test::Words(w) | Test::NotWords(w) => write_words(&mut out, w),
        }
        out.push_str(";\n");
    }
    for c in &file.constraints {
        out.push_str(&write_constraint(c, tagset));
        out.push('\n');
    }
    out
}
