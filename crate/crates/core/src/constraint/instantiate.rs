//! Binding constraints to concrete sentence positions.

use super::{Constraint, ContextItem, Position, Test};
use crate::tagset::Tag;

/// Word forms and candidate tags of one sentence.
#[derive(Clone, Copy, Debug)]
pub struct Lattice<'a> {
    pub words: &'a [String],
    pub candidates: &'a [Vec<Tag>],
}

impl Lattice<'_> {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// One multiplicative term of an influence product: the weight of `tags`
/// at `position` (or, when `negated`, of every candidate outside `tags`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor {
    pub position: usize,
    pub tags: Vec<Tag>,
    pub negated: bool,
}

/// Outcome of binding one test to one position.
enum Bound {
    Factor(Factor),
    Satisfied,
    Fails,
}

fn bind(test: &Test, lattice: &Lattice<'_>, pos: Option<usize>) -> Bound {
    let Some(pos) = pos.filter(|p| *p < lattice.len()) else {
        // Outside the sentence only an explicit boundary test holds.
        return match test {
            Test::Tags(t) if t.contains(&Tag::BOUNDARY) => Bound::Satisfied,
            _ => Bound::Fails,
        };
    };
    match test {
        Test::Tags(t) => {
            let tags: Vec<Tag> = t.iter().copied().filter(|t| !t.is_boundary()).collect();
            if tags.is_empty() {
                Bound::Fails
            } else {
                Bound::Factor(Factor {
                    position: pos,
                    tags,
                    negated: false,
                })
            }
        }
        Test::NotTags(t) => Bound::Factor(Factor {
            position: pos,
            tags: t.iter().copied().filter(|t| !t.is_boundary()).collect(),
            negated: true,
        }),
        Test::Words(w) => {
            if w.contains(&lattice.words[pos]) {
                Bound::Satisfied
            } else {
                Bound::Fails
            }
        }
        Test::NotWords(w) => {
            if w.contains(&lattice.words[pos]) {
                Bound::Fails
            } else {
                Bound::Satisfied
            }
        }
    }
}

fn step(pos: Option<usize>, dir: i64) -> Option<usize> {
    pos.and_then(|p| usize::try_from(p as i64 + dir).ok())
}

/// Every way to lay a chain (ordered from the target outward) onto the
/// sentence, starting at `pos` and moving in direction `dir`.
fn chain_bindings(
    chain: &[&ContextItem],
    lattice: &Lattice<'_>,
    pos: Option<usize>,
    dir: i64,
    acc: &mut Vec<Factor>,
    out: &mut Vec<Vec<Factor>>,
) {
    let Some((item, rest)) = chain.split_first() else {
        out.push(acc.clone());
        return;
    };
    let mark = acc.len();
    match item.position {
        Position::Repeated => {
            // Spans of length 0, 1, ... while they stay inside the sentence.
            let mut cursor = pos;
            loop {
                chain_bindings(rest, lattice, cursor, dir, acc, out);
                let Some(p) = cursor.filter(|p| *p < lattice.len()) else {
                    break;
                };
                match bind(&item.test, lattice, Some(p)) {
                    Bound::Factor(f) => acc.push(f),
                    Bound::Satisfied => {}
                    Bound::Fails => break,
                }
                cursor = step(cursor, dir);
            }
        }
        _ => match bind(&item.test, lattice, pos) {
            Bound::Factor(f) => {
                acc.push(f);
                chain_bindings(rest, lattice, step(pos, dir), dir, acc, out);
            }
            Bound::Satisfied => chain_bindings(rest, lattice, step(pos, dir), dir, acc, out),
            Bound::Fails => {}
        },
    }
    acc.truncate(mark);
}

/// All instantiations of `c` with `(i, tag)` as the target pair.
///
/// Each returned list holds the factors of one anchoring. Fixed offsets
/// bind directly; a repeated item contributes one anchoring per span
/// length that fits. Anchorings that bind a test outside the sentence (other
/// than a boundary test) or fail a word test are dropped. The target
/// position never appears among the factors.
pub fn instantiate(c: &Constraint, lattice: &Lattice<'_>, i: usize, tag: Tag) -> Vec<Vec<Factor>> {
    if i >= lattice.len() || !c.target.matches(&lattice.words[i], tag) || !lattice.candidates[i].contains(&tag) {
        return Vec::new();
    }
    let mut fixed = Vec::new();
    for item in c.context() {
        if let Position::Offset(o) = item.position {
            let pos = usize::try_from(i as i64 + o as i64).ok();
            match bind(&item.test, lattice, pos) {
                Bound::Factor(f) => fixed.push(f),
                Bound::Satisfied => {}
                Bound::Fails => return Vec::new(),
            }
        }
    }
    fn chain(items: &[ContextItem]) -> Vec<&ContextItem> {
        items
            .iter()
            .filter(|it| !matches!(it.position, Position::Offset(_)))
            .collect()
    }
    let mut left_chain = chain(&c.left);
    left_chain.reverse();
    let right_chain = chain(&c.right);

    let mut lefts = Vec::new();
    chain_bindings(&left_chain, lattice, i.checked_sub(1), -1, &mut Vec::new(), &mut lefts);
    if lefts.is_empty() {
        return Vec::new();
    }
    let mut rights = Vec::new();
    chain_bindings(&right_chain, lattice, Some(i + 1), 1, &mut Vec::new(), &mut rights);

    let mut out = Vec::with_capacity(lefts.len() * rights.len());
    for l in &lefts {
        for r in &rights {
            let mut factors = fixed.clone();
            factors.extend(l.iter().cloned());
            factors.extend(r.iter().cloned());
            out.push(factors);
        }
    }
    out
}
