//! Relaxation labelling over per-word candidate tags.
//!
//! Each word starts from its lexical distribution. Every iteration computes,
//! for each candidate, the support of the constraints that apply to it
//! (compatibility times the current weights of the context), squashes it
//! into `[-1, 1]` and rescales the weights by `1 + support`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::constraint::{instantiate, ConstraintSet, Factor, Lattice};
use crate::lexicon::{lexical_distribution, Lexicon};
use crate::tagset::{Tag, TagSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SupportNorm {
    /// `s / (1 + |s|)`
    Rational,
    /// `min(1, max(-1, s))`
    Clamp,
}

impl FromStr for SupportNorm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rational" => Ok(SupportNorm::Rational),
            "clamp" => Ok(SupportNorm::Clamp),
            _ => Err(format!("unknown support normalization {s:?} (rational|clamp)")),
        }
    }
}

impl fmt::Display for SupportNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SupportNorm::Rational => "rational",
            SupportNorm::Clamp => "clamp",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitMode {
    Lexical,
    /// Random interior weights, seeded per sentence from this seed.
    Random(u64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelaxParams {
    pub max_iterations: usize,
    pub epsilon: f64,
    pub norm: SupportNorm,
    /// Raw supports are divided by this before normalization.
    pub divisor: f64,
    pub init: InitMode,
}

impl Default for RelaxParams {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            epsilon: 1e-3,
            norm: SupportNorm::Rational,
            divisor: 1.0,
            init: InitMode::Lexical,
        }
    }
}

/// Maps a raw support into `[-1, 1]`.
pub fn normalize_support(raw: f64, norm: SupportNorm, divisor: f64) -> f64 {
    let s = raw / divisor;
    match norm {
        SupportNorm::Rational => s / (1.0 + s.abs()),
        SupportNorm::Clamp => s.clamp(-1.0, 1.0),
    }
}

/// Candidate tags and their weights for every word of a sentence.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedLabelling {
    /// Candidates per word, in tag order.
    pub candidates: Vec<Vec<Tag>>,
    pub weights: Vec<Vec<f64>>,
    /// Lexical probabilities, kept for argmax tie-breaking.
    pub lexical: Vec<Vec<f64>>,
}

impl WeightedLabelling {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn weight_of(&self, i: usize, tag: Tag) -> f64 {
        self.candidates[i]
            .iter()
            .position(|t| *t == tag)
            .map_or(0.0, |j| self.weights[i][j])
    }

    /// Largest `|Σ_j p_ij - 1|` over words.
    pub fn normalization_deviation(&self) -> f64 {
        self.weights
            .iter()
            .map(|w| (w.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Highest-weight tag per word; ties go to the higher lexical
    /// probability, then to tag order.
    pub fn best_tags(&self) -> Vec<Tag> {
        (0..self.len())
            .map(|i| {
                let mut best = 0;
                for j in 1..self.candidates[i].len() {
                    let (w, bw) = (self.weights[i][j], self.weights[i][best]);
                    if w > bw || (w == bw && self.lexical[i][j] > self.lexical[i][best]) {
                        best = j;
                    }
                }
                self.candidates[i][best]
            })
            .collect()
    }

    /// Applies `p_ij <- p_ij (1 + S_ij) / Σ_k p_ik (1 + S_ik)`. Words whose
    /// denominator is zero keep their weights.
    pub fn update_step(&mut self, supports: &[Vec<f64>]) -> UpdateOutcome {
        let mut out = UpdateOutcome::default();
        for (w, s) in self.weights.iter_mut().zip(supports) {
            if w.len() < 2 {
                continue;
            }
            let scaled: Vec<f64> = w.iter().zip(s).map(|(p, s)| p * (1.0 + s)).collect();
            let denom: f64 = scaled.iter().sum();
            if denom <= 0.0 || !denom.is_finite() {
                out.frozen += 1;
                continue;
            }
            for (p, x) in w.iter_mut().zip(scaled) {
                let new = x / denom;
                out.max_change = out.max_change.max((new - *p).abs());
                *p = new;
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct UpdateOutcome {
    pub max_change: f64,
    /// Words left unchanged because all their mass sat on labels with
    /// support -1.
    pub frozen: usize,
}

pub fn init_weights(words: &[String], lex: &Lexicon, tagset: &TagSet) -> WeightedLabelling {
    let mut l = WeightedLabelling {
        candidates: Vec::with_capacity(words.len()),
        weights: Vec::with_capacity(words.len()),
        lexical: Vec::with_capacity(words.len()),
    };
    for w in words {
        let (tags, probs): (Vec<Tag>, Vec<f64>) = lexical_distribution(lex, tagset, w).into_iter().unzip();
        l.candidates.push(tags);
        l.weights.push(probs.clone());
        l.lexical.push(probs);
    }
    l
}

fn randomize(l: &mut WeightedLabelling, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for w in &mut l.weights {
        if w.len() < 2 {
            continue;
        }
        for p in w.iter_mut() {
            *p = rng.gen_range(0.05..1.0);
        }
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|p| *p /= s);
    }
}

fn factor_weight(l: &WeightedLabelling, f: &Factor) -> f64 {
    l.candidates[f.position]
        .iter()
        .zip(&l.weights[f.position])
        .filter(|(t, _)| f.tags.contains(t) != f.negated)
        .map(|(_, p)| p)
        .sum()
}

/// Unnormalized support of candidate `j` of word `i`: the sum over every
/// instantiation of every applicable constraint of its compatibility times
/// the product of its context weights.
pub fn raw_support(l: &WeightedLabelling, words: &[String], constraints: &ConstraintSet, i: usize, j: usize) -> f64 {
    let tag = l.candidates[i][j];
    let lattice = Lattice {
        words,
        candidates: &l.candidates,
    };
    constraints
        .lookup(&words[i], tag)
        .flat_map(|c| {
            instantiate(c, &lattice, i, tag)
                .into_iter()
                .map(move |fs| c.compatibility * fs.iter().map(|f| factor_weight(l, f)).product::<f64>())
        })
        .sum()
}

/// An instantiation with its factors resolved to candidate indices: the
/// factor weight is the sum of the weights at those indices.
struct Compiled {
    compatibility: f64,
    factors: Vec<(usize, Vec<usize>)>,
}

fn compile_sentence(l: &WeightedLabelling, words: &[String], constraints: &ConstraintSet) -> Vec<Vec<Vec<Compiled>>> {
    let lattice = Lattice {
        words,
        candidates: &l.candidates,
    };
    (0..l.len())
        .map(|i| {
            if l.candidates[i].len() < 2 {
                return Vec::new();
            }
            l.candidates[i]
                .iter()
                .map(|&tag| {
                    let mut out = Vec::new();
                    for c in constraints.lookup(&words[i], tag) {
                        'inst: for fs in instantiate(c, &lattice, i, tag) {
                            let mut factors = Vec::with_capacity(fs.len());
                            for f in fs {
                                let idx: Vec<usize> = l.candidates[f.position]
                                    .iter()
                                    .enumerate()
                                    .filter(|(_, t)| f.tags.contains(t) != f.negated)
                                    .map(|(k, _)| k)
                                    .collect();
                                if idx.is_empty() {
                                    // Zero weight forever.
                                    continue 'inst;
                                }
                                factors.push((f.position, idx));
                            }
                            out.push(Compiled {
                                compatibility: c.compatibility,
                                factors,
                            });
                        }
                    }
                    out
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RelaxDiagnostics {
    pub iterations: usize,
    pub max_change: f64,
    /// Constraint instantiations evaluated per iteration.
    pub instantiations: usize,
    /// Words frozen by a zero update denominator, summed over iterations.
    pub frozen: usize,
    /// Largest deviation of a word's weight sum from 1 after any update.
    pub max_norm_deviation: f64,
}

impl RelaxDiagnostics {
    /// `sentence-id iterations max-change instantiation-count`
    pub fn record(&self, sentence_id: usize) -> String {
        format!(
            "{sentence_id} {} {:e} {}",
            self.iterations, self.max_change, self.instantiations
        )
    }
}

/// Relaxation labelling with a shared constraint set.
#[derive(Clone, Copy)]
pub struct Relaxer<'a> {
    pub constraints: &'a ConstraintSet,
    pub lexicon: &'a Lexicon,
    pub tagset: &'a TagSet,
    pub params: &'a RelaxParams,
}

impl Relaxer<'_> {
    pub fn run(&self, words: &[String]) -> (Vec<Tag>, RelaxDiagnostics) {
        self.run_observed(words, 0, &mut |_, _| {})
    }

    /// Runs relaxation, calling `observe(iteration, labelling)` after every
    /// update. `sentence_id` seeds random initialization.
    pub fn run_observed(
        &self,
        words: &[String],
        sentence_id: u64,
        observe: &mut dyn FnMut(usize, &WeightedLabelling),
    ) -> (Vec<Tag>, RelaxDiagnostics) {
        let mut l = init_weights(words, self.lexicon, self.tagset);
        if let InitMode::Random(seed) = self.params.init {
            randomize(&mut l, seed ^ sentence_id.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        }
        let compiled = compile_sentence(&l, words, self.constraints);
        let mut diag = RelaxDiagnostics {
            instantiations: compiled.iter().flatten().map(Vec::len).sum(),
            ..Default::default()
        };
        let mut supports: Vec<Vec<f64>> = l.candidates.iter().map(|c| vec![0.0; c.len()]).collect();
        for it in 1..=self.params.max_iterations.max(1) {
            for (i, per_tag) in compiled.iter().enumerate() {
                for (j, insts) in per_tag.iter().enumerate() {
                    let raw: f64 = insts
                        .iter()
                        .map(|c| {
                            c.compatibility
                                * c.factors
                                    .iter()
                                    .map(|(p, idx)| idx.iter().map(|&k| l.weights[*p][k]).sum::<f64>())
                                    .product::<f64>()
                        })
                        .sum();
                    supports[i][j] = normalize_support(raw, self.params.norm, self.params.divisor);
                }
            }
            let outcome = l.update_step(&supports);
            diag.iterations = it;
            diag.max_change = outcome.max_change;
            diag.frozen += outcome.frozen;
            diag.max_norm_deviation = diag.max_norm_deviation.max(l.normalization_deviation());
            observe(it, &l);
            if outcome.max_change < self.params.epsilon {
                break;
            }
        }
        (l.best_tags(), diag)
    }

    /// Tags sentences in parallel; output order follows the input.
    pub fn tag_all(&self, sentences: &[Vec<String>]) -> Vec<(Vec<Tag>, RelaxDiagnostics)> {
        sentences
            .par_iter()
            .enumerate()
            .map(|(k, s)| self.run_observed(s, k as u64, &mut |_, _| {}))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::parse_constraints;
    use crate::constraint::Source;

    fn words(ws: &[&str]) -> Vec<String> {
        ws.iter().map(|s| s.to_string()).collect()
    }

    fn setup() -> (TagSet, Lexicon) {
        let ts = TagSet::from_symbols(["A", "B", "X", "DT", "JJ"]).unwrap();
        let mut lex = Lexicon::new();
        lex.add("w", ts.lookup("A").unwrap(), 1);
        lex.add("w", ts.lookup("B").unwrap(), 1);
        lex.add("x", ts.lookup("X").unwrap(), 5);
        lex.add("the", ts.lookup("DT").unwrap(), 3);
        lex.add("the", ts.lookup("JJ").unwrap(), 1);
        (ts, lex)
    }

    fn cs(text: &str, ts: &TagSet) -> ConstraintSet {
        ConstraintSet::from_constraints(parse_constraints(text, ts).unwrap().constraints, Source::HandWritten)
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize_support(0.0, SupportNorm::Rational, 1.0), 0.0);
        assert_eq!(normalize_support(1.0, SupportNorm::Rational, 1.0), 0.5);
        assert_eq!(normalize_support(-7.0, SupportNorm::Clamp, 1.0), -1.0);
        assert_eq!(normalize_support(3.0, SupportNorm::Rational, 3.0), 0.5);
        assert_eq!("clamp".parse::<SupportNorm>(), Ok(SupportNorm::Clamp));
        assert!("tanh".parse::<SupportNorm>().is_err());
    }

    #[test]
    fn init_passes_lexical_probabilities_through() {
        let (ts, lex) = setup();
        let l = init_weights(&words(&["the", "x", "zzz"]), &lex, &ts);
        assert_eq!(l.weights[0], vec![0.75, 0.25]);
        assert_eq!(l.weights[1], vec![1.0]);
        assert_eq!(l.candidates[2].len(), ts.open_class().len());
        assert!(l.weights[2].iter().all(|p| (*p - 0.2).abs() < 1e-15));
    }

    #[test]
    fn update_examples() {
        let mut l = WeightedLabelling {
            candidates: vec![vec![Tag(0), Tag(1)]],
            weights: vec![vec![0.5, 0.5]],
            lexical: vec![vec![0.5, 0.5]],
        };
        l.update_step(&[vec![1.0, -1.0]]);
        assert_eq!(l.weights[0], vec![1.0, 0.0]);

        l.weights[0] = vec![0.6, 0.4];
        let out = l.update_step(&[vec![0.5, 0.5]]);
        assert!((l.weights[0][0] - 0.6).abs() < 1e-15 && out.max_change < 1e-15);

        l.weights[0] = vec![1.0, 0.0];
        let out = l.update_step(&[vec![-1.0, 0.3]]);
        assert_eq!(out.frozen, 1);
        assert_eq!(l.weights[0], vec![1.0, 0.0]);
    }

    #[test]
    fn raw_support_examples() {
        let (ts, mut lex) = setup();
        let a = ts.lookup("A").unwrap();
        let x = ts.lookup("X").unwrap();
        lex.add("y", x, 4);
        lex.add("y", a, 1);
        let ws = words(&["y", "w"]);
        let l = init_weights(&ws, &lex, &ts);
        assert_eq!(raw_support(&l, &ws, &ConstraintSet::new(), 1, 0), 0.0);
        // One factor with weight 0.8.
        let c = cs("0.5 -1:[X] <B>;", &ts);
        assert!((raw_support(&l, &ws, &c, 1, 1) - 0.4).abs() < 1e-12);
        let c = cs("0.4 -1:[X] <B>;", &ts);
        assert!((raw_support(&l, &ws, &c, 1, 1) - 0.32).abs() < 1e-12);
        // A repeated span gives one instantiation per reachable anchor.
        let ws = words(&["y", "y", "w"]);
        let mut l = init_weights(&ws, &lex, &ts);
        l.weights[0] = vec![0.2, 0.8];
        let c = cs("1.0 ([A]) (-[DT])+ <B>;", &ts);
        // Span empty: A at 1 (0.2); span {1}: A at 0 (0.2) times not-DT at 1 (1.0).
        assert!((raw_support(&l, &ws, &c, 2, 1) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn relaxation_follows_context() {
        let (ts, lex) = setup();
        let c = cs("1.0 -1:[X] <B>;", &ts);
        let params = RelaxParams::default();
        let r = Relaxer {
            constraints: &c,
            lexicon: &lex,
            tagset: &ts,
            params: &params,
        };
        let mut trace = Vec::new();
        let (tags, diag) = r.run_observed(&words(&["x", "w"]), 0, &mut |_, l| trace.push(l.weights[1][1]));
        assert_eq!(tags, vec![ts.lookup("X").unwrap(), ts.lookup("B").unwrap()]);
        assert!(trace.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(diag.instantiations, 1);
        assert!(diag.max_norm_deviation < 1e-12);
    }

    #[test]
    fn unambiguous_sentence_takes_one_iteration() {
        let (ts, lex) = setup();
        let params = RelaxParams::default();
        let c = ConstraintSet::new();
        let r = Relaxer {
            constraints: &c,
            lexicon: &lex,
            tagset: &ts,
            params: &params,
        };
        let (tags, diag) = r.run(&words(&["x", "x"]));
        assert_eq!(tags, vec![ts.lookup("X").unwrap(); 2]);
        assert_eq!(diag.iterations, 1);
        assert_eq!(diag.record(7), "7 1 0e0 0");
    }

    #[test]
    fn ties_use_lexical_probability_then_tag_order() {
        let l = WeightedLabelling {
            candidates: vec![vec![Tag(0), Tag(1)], vec![Tag(0), Tag(1)]],
            weights: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            lexical: vec![vec![0.4, 0.6], vec![0.5, 0.5]],
        };
        assert_eq!(l.best_tags(), vec![Tag(1), Tag(0)]);
    }

    #[test]
    fn random_init_is_seeded_and_normalized() {
        let (ts, lex) = setup();
        let params = RelaxParams {
            init: InitMode::Random(3),
            max_iterations: 1,
            ..Default::default()
        };
        let c = ConstraintSet::new();
        let r = Relaxer {
            constraints: &c,
            lexicon: &lex,
            tagset: &ts,
            params: &params,
        };
        let mut seen = Vec::new();
        r.run_observed(&words(&["the", "w"]), 1, &mut |_, l| seen.push(l.clone()));
        let mut again = Vec::new();
        r.run_observed(&words(&["the", "w"]), 1, &mut |_, l| again.push(l.clone()));
        assert_eq!(seen, again);
        assert!(seen[0].normalization_deviation() < 1e-12);
        assert_ne!(seen[0].weights[0], vec![0.75, 0.25]);
    }
}
