//! Model combinations: unions of constraint sources, or a baseline.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::baseline::{tag_most_likely, tag_viterbi_bigram};
use crate::constraint::{ConstraintSet, Source};
use crate::corpus::TaggedSentence;
use crate::lexicon::{build_lexicon, Lexicon};
use crate::ngram::{
    collect_ngrams, ngrams_to_constraints, transition_probabilities, NgramError, NgramTable, Transitions,
};
use crate::relax::{RelaxDiagnostics, RelaxParams, Relaxer};
use crate::tagset::{Tag, TagSet};
use crate::tree::{learn_trees, LearnError, LearnedTree, LearnerParams};

/// A tagged sentence and, for relaxation models, its diagnostics.
pub type TaggedWithDiagnostics = (Vec<Tag>, Option<RelaxDiagnostics>);

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid model combination {0:?}: use letters B, T, C, H or ML, HMM")]
    Syntax(String),
    #[error("model {0} requested but its constraints were not supplied")]
    Missing(char),
    #[error(transparent)]
    Ngram(#[from] NgramError),
    #[error(transparent)]
    Learn(#[from] LearnError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Baseline {
    MostLikely,
    Hmm,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Flags {
    pub bigrams: bool,
    pub trigrams: bool,
    pub learned: bool,
    pub hand_written: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelCombination {
    Baseline(Baseline),
    Relax(Flags),
}

impl FromStr for ModelCombination {
    type Err = ModelError;

    /// Accepts `ML`, `HMM`, or letters from `BTCH` with optional commas
    /// (`BC`, `B,T,C`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let up = s.trim().to_ascii_uppercase();
        match up.as_str() {
            "ML" => return Ok(ModelCombination::Baseline(Baseline::MostLikely)),
            "HMM" => return Ok(ModelCombination::Baseline(Baseline::Hmm)),
            _ => {}
        }
        let mut f = Flags::default();
        for ch in up.chars().filter(|c| *c != ',') {
            let slot = match ch {
                'B' => &mut f.bigrams,
                'T' => &mut f.trigrams,
                'C' => &mut f.learned,
                'H' => &mut f.hand_written,
                _ => return Err(ModelError::Syntax(s.to_string())),
            };
            if *slot {
                return Err(ModelError::Syntax(s.to_string()));
            }
            *slot = true;
        }
        if f == Flags::default() {
            return Err(ModelError::Syntax(s.to_string()));
        }
        Ok(ModelCombination::Relax(f))
    }
}

impl fmt::Display for ModelCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelCombination::Baseline(Baseline::MostLikely) => f.write_str("ML"),
            ModelCombination::Baseline(Baseline::Hmm) => f.write_str("HMM"),
            ModelCombination::Relax(fl) => {
                for (on, c) in [
                    (fl.bigrams, 'B'),
                    (fl.trigrams, 'T'),
                    (fl.learned, 'C'),
                    (fl.hand_written, 'H'),
                ] {
                    if on {
                        write!(f, "{c}")?;
                    }
                }
                Ok(())
            }
        }
    }
}

/// Constraint sets available for joining.
#[derive(Clone, Debug, Default)]
pub struct ModelSources {
    pub bigrams: Option<ConstraintSet>,
    pub trigrams: Option<ConstraintSet>,
    pub learned: Option<ConstraintSet>,
    pub hand_written: Option<ConstraintSet>,
}

impl ModelSources {
    /// Union of the flagged sets.
    pub fn resolve(&self, flags: Flags) -> Result<ConstraintSet, ModelError> {
        let mut out = ConstraintSet::new();
        for (on, set, c) in [
            (flags.bigrams, &self.bigrams, 'B'),
            (flags.trigrams, &self.trigrams, 'T'),
            (flags.learned, &self.learned, 'C'),
            (flags.hand_written, &self.hand_written, 'H'),
        ] {
            if on {
                out.join(set.as_ref().ok_or(ModelError::Missing(c))?);
            }
        }
        Ok(out)
    }
}

/// Source label for each model letter.
pub fn source_of(letter: char) -> Option<Source> {
    match letter {
        'B' => Some(Source::Bigram),
        'T' => Some(Source::Trigram),
        'C' => Some(Source::Learned),
        'H' => Some(Source::HandWritten),
        _ => None,
    }
}

/// Everything learned from a training corpus.
#[derive(Clone, Debug)]
pub struct TrainedModels {
    pub lexicon: Lexicon,
    pub bigrams: NgramTable,
    pub trigrams: NgramTable,
    pub transitions: Transitions,
    pub trees: Vec<LearnedTree>,
    /// Bigram, trigram and learned constraint sets; hand-written ones are
    /// added by the caller.
    pub sources: ModelSources,
}

impl TrainedModels {
    pub fn train(train: &[TaggedSentence], tagset: &TagSet, learner: &LearnerParams) -> Result<Self, ModelError> {
        let lexicon = build_lexicon(train);
        let bigrams = collect_ngrams(train, 2)?;
        let trigrams = collect_ngrams(train, 3)?;
        let transitions = transition_probabilities(&bigrams, tagset)?;
        let trees = learn_trees(train, &lexicon, tagset, learner)?;
        let sources = ModelSources {
            bigrams: Some(ConstraintSet::from_constraints(
                ngrams_to_constraints(&bigrams),
                Source::Bigram,
            )),
            trigrams: Some(ConstraintSet::from_constraints(
                ngrams_to_constraints(&trigrams),
                Source::Trigram,
            )),
            learned: Some(ConstraintSet::from_constraints(
                trees.iter().flat_map(LearnedTree::constraints),
                Source::Learned,
            )),
            hand_written: None,
        };
        Ok(Self {
            lexicon,
            bigrams,
            trigrams,
            transitions,
            trees,
            sources,
        })
    }

    /// Tags every sentence with `model`. Relaxation diagnostics are empty
    /// for the baselines.
    pub fn tag(
        &self,
        model: ModelCombination,
        sentences: &[Vec<String>],
        tagset: &TagSet,
        params: &RelaxParams,
    ) -> Result<Vec<TaggedWithDiagnostics>, ModelError> {
        Ok(match model {
            ModelCombination::Baseline(Baseline::MostLikely) => sentences
                .par_iter()
                .map(|s| (tag_most_likely(s, &self.lexicon, tagset), None))
                .collect(),
            ModelCombination::Baseline(Baseline::Hmm) => sentences
                .par_iter()
                .map(|s| (tag_viterbi_bigram(s, &self.lexicon, tagset, &self.transitions), None))
                .collect(),
            ModelCombination::Relax(flags) => {
                let constraints = self.sources.resolve(flags)?;
                let relaxer = Relaxer {
                    constraints: &constraints,
                    lexicon: &self.lexicon,
                    tagset,
                    params,
                };
                relaxer
                    .tag_all(sentences)
                    .into_iter()
                    .map(|(t, d)| (t, Some(d)))
                    .collect()
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::{Constraint, Target};
    use crate::tagset::Tag;

    #[test]
    fn parse_and_display() {
        for (s, shown) in [
            ("BC", "BC"),
            ("B,T,C,H", "BTCH"),
            ("hb", "BH"),
            ("ml", "ML"),
            ("HMM", "HMM"),
            ("CB", "BC"),
        ] {
            let m: ModelCombination = s.parse().unwrap_or_else(|e| panic!("{s}: {e}"));
            assert_eq!(m.to_string(), shown);
        }
        for bad in ["", "BB", "X", "B,X", ","] {
            assert!(bad.parse::<ModelCombination>().is_err(), "{bad}");
        }
    }

    #[test]
    fn resolve_joins_sets() {
        let c = |t| Constraint {
            compatibility: 1.0,
            target: Target::tag(Tag(t)),
            left: vec![],
            right: vec![],
        };
        let sources = ModelSources {
            bigrams: Some(ConstraintSet::from_constraints([c(0), c(1)], Source::Bigram)),
            learned: Some(ConstraintSet::from_constraints([c(2)], Source::Learned)),
            ..Default::default()
        };
        let ModelCombination::Relax(f) = "BC".parse().unwrap() else {
            panic!()
        };
        assert_eq!(sources.resolve(f).unwrap().len(), 3);
        let ModelCombination::Relax(f) = "BH".parse().unwrap() else {
            panic!()
        };
        assert_eq!(sources.resolve(f).unwrap_err(), ModelError::Missing('H'));
    }
}
