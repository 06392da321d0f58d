//! Hybrid part-of-speech tagging: statistical decision trees, n-gram and
//! hand-written context constraints, and a relaxation-labelling tagger.

pub mod baseline;
pub mod constraint;
pub mod corpus;
pub mod eval;
pub mod lexicon;
pub mod model;
pub mod ngram;
pub mod relax;
pub mod synth;
pub mod tagset;
pub mod tree;
