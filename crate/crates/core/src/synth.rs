//! Synthetic tagged corpora from a Markov chain over tags with per-tag
//! word emissions.
//!
//! The generator spec is JSON:
//!
//! ```json
//! {
//!   "tags": ["D", "N", "V"],
//!   "start": {"D": 1.0},
//!   "transitions": {"D": {"N": 1.0}, "N": {"V": 0.5, "N": 0.5}, "V": {"D": 1.0}},
//!   "second_order": [{"prev2": "D", "prev": "N", "next": {"V": 1.0}}],
//!   "emissions": {"D": {"the": 1.0}, "N": {"dog": 0.5, "walk": 0.5}, "V": {"walk": 1.0}},
//!   "lengths": {"3": 0.5, "6": 0.5}
//! }
//! ```
//!
//! `second_order` rows, when present, replace the bigram row for tag
//! histories `(prev2, prev)`. An optional `"final_tag"` is appended to every
//! sentence after the sampled length (terminal punctuation); it needs
//! emissions but no transition row.

use std::collections::{BTreeMap, HashMap};

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{TaggedSentence, Token};
use crate::tagset::{Tag, TagSet};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SynthError {
    #[error("generator spec is not valid JSON: {0}")]
    Json(String),
    #[error("invalid generator spec: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderRow {
    pub prev2: String,
    pub prev: String,
    pub next: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub tags: Vec<String>,
    pub start: BTreeMap<String, f64>,
    pub transitions: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub second_order: Vec<SecondOrderRow>,
    pub emissions: BTreeMap<String, BTreeMap<String, f64>>,
    /// Sentence length distribution, not counting `final_tag`.
    pub lengths: BTreeMap<usize, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_tag: Option<String>,
}

pub fn parse_synth_spec(text: &str) -> Result<SynthSpec, SynthError> {
    serde_json::from_str(text).map_err(|e| SynthError::Json(e.to_string()))
}

const TOLERANCE: f64 = 1e-6;

struct Sampler<T> {
    items: Vec<T>,
    dist: WeightedIndex<f64>,
}

impl<T: Clone> Sampler<T> {
    fn new(what: &str, entries: Vec<(T, f64)>) -> Result<Self, SynthError> {
        let bad = |m: String| Err(SynthError::Invalid(format!("{what}: {m}")));
        if entries.is_empty() {
            return bad("empty distribution".into());
        }
        if let Some((_, p)) = entries.iter().find(|(_, p)| !p.is_finite() || *p < 0.0) {
            return bad(format!("invalid probability {p}"));
        }
        let total: f64 = entries.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > TOLERANCE {
            return bad(format!("probabilities sum to {total}, not 1"));
        }
        let (items, weights): (Vec<T>, Vec<f64>) = entries.into_iter().unzip();
        let dist = WeightedIndex::new(weights).map_err(|e| SynthError::Invalid(format!("{what}: {e}")))?;
        Ok(Self { items, dist })
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> T {
        self.items[self.dist.sample(rng)].clone()
    }
}

/// A validated spec ready for sampling.
pub struct Generator {
    tagset: TagSet,
    start: Sampler<Tag>,
    rows: Vec<Option<Sampler<Tag>>>,
    second: HashMap<(Tag, Tag), Sampler<Tag>>,
    emissions: Vec<Sampler<String>>,
    lengths: Sampler<usize>,
    final_tag: Option<Tag>,
}

impl Generator {
    pub fn new(spec: &SynthSpec) -> Result<Self, SynthError> {
        let tagset = TagSet::from_symbols(&spec.tags).map_err(|e| SynthError::Invalid(e.to_string()))?;
        if tagset.len() != spec.tags.len() || tagset.is_empty() {
            return Err(SynthError::Invalid("tags must be distinct and non-empty".into()));
        }
        let tag = |name: &str| {
            tagset
                .get(name)
                .filter(|t| !t.is_boundary())
                .ok_or_else(|| SynthError::Invalid(format!("unknown tag {name:?}")))
        };
        let tag_dist = |what: &str, m: &BTreeMap<String, f64>| -> Result<Sampler<Tag>, SynthError> {
            let entries = m
                .iter()
                .map(|(k, p)| Ok((tag(k)?, *p)))
                .collect::<Result<Vec<_>, SynthError>>()?;
            Sampler::new(what, entries)
        };
        let start = tag_dist("start", &spec.start)?;
        for k in spec.transitions.keys().chain(spec.emissions.keys()) {
            tag(k)?;
        }
        let final_tag = spec.final_tag.as_deref().map(tag).transpose()?;
        if let Some(f) = &spec.final_tag {
            let reachable = spec.start.contains_key(f)
                || spec.transitions.values().any(|r| r.contains_key(f))
                || spec.second_order.iter().any(|r| r.next.contains_key(f));
            if reachable || spec.transitions.contains_key(f) {
                return Err(SynthError::Invalid(format!(
                    "final tag {f} must not take part in the chain"
                )));
            }
        }
        let mut rows = Vec::new();
        let mut emissions = Vec::new();
        for name in &spec.tags {
            match spec.transitions.get(name) {
                Some(row) => rows.push(Some(tag_dist(&format!("transitions from {name}"), row)?)),
                None if spec.final_tag.as_ref() == Some(name) => rows.push(None),
                None => return Err(SynthError::Invalid(format!("no transition row for {name}"))),
            }
            let em = spec
                .emissions
                .get(name)
                .ok_or_else(|| SynthError::Invalid(format!("no emissions for {name}")))?;
            if let Some(w) = em.keys().find(|w| w.is_empty() || w.chars().any(char::is_whitespace)) {
                return Err(SynthError::Invalid(format!("invalid word {w:?}")));
            }
            emissions.push(Sampler::new(
                &format!("emissions of {name}"),
                em.iter().map(|(w, p)| (w.clone(), *p)).collect(),
            )?);
        }
        let mut second = HashMap::new();
        for r in &spec.second_order {
            let key = (tag(&r.prev2)?, tag(&r.prev)?);
            let s = tag_dist(&format!("transitions from {} {}", r.prev2, r.prev), &r.next)?;
            if second.insert(key, s).is_some() {
                return Err(SynthError::Invalid(format!("duplicate history {} {}", r.prev2, r.prev)));
            }
        }
        if spec.lengths.contains_key(&0) {
            return Err(SynthError::Invalid("sentence length 0".into()));
        }
        let lengths = Sampler::new("lengths", spec.lengths.iter().map(|(l, p)| (*l, *p)).collect())?;
        Ok(Self {
            tagset,
            start,
            rows,
            second,
            emissions,
            lengths,
            final_tag,
        })
    }

    pub fn tagset(&self) -> &TagSet {
        &self.tagset
    }

    fn sentence(&self, rng: &mut ChaCha8Rng) -> TaggedSentence {
        let len = self.lengths.sample(rng);
        let mut tags: Vec<Tag> = Vec::with_capacity(len);
        for i in 0..len {
            let t = match i {
                0 => self.start.sample(rng),
                _ => {
                    let prev = tags[i - 1];
                    match (i >= 2).then(|| self.second.get(&(tags[i - 2], prev))).flatten() {
                        Some(s) => s.sample(rng),
                        None => self.rows[prev.index()]
                            .as_ref()
                            .expect("validated: only the final tag lacks a row")
                            .sample(rng),
                    }
                }
            };
            tags.push(t);
        }
        tags.extend(self.final_tag);
        TaggedSentence {
            tokens: tags
                .into_iter()
                .map(|tag| Token {
                    word: self.emissions[tag.index()].sample(rng),
                    tag,
                })
                .collect(),
        }
    }

    /// Sentences until at least `min_words` tokens have been produced.
    pub fn generate(&self, min_words: usize, seed: u64) -> Vec<TaggedSentence> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        let mut n = 0;
        while n < min_words {
            let s = self.sentence(&mut rng);
            n += s.len();
            out.push(s);
        }
        out
    }
}

/// Validates `spec` and samples a corpus of at least `min_words` tokens.
pub fn generate_synthetic_corpus(
    spec: &SynthSpec,
    min_words: usize,
    seed: u64,
) -> Result<(TagSet, Vec<TaggedSentence>), SynthError> {
    let g = Generator::new(spec)?;
    let corpus = g.generate(min_words, seed);
    Ok((g.tagset, corpus))
}
