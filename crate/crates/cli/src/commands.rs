use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use relaxtag::constraint::{
    compile_tree, parse_constraints, serialize_constraints, ConstraintFile, ConstraintSet, Source,
};
use relaxtag::corpus::{
    corpus_stats, parse_tagged_corpus, parse_untagged, write_tagged_corpus, TagPolicy, TaggedSentence,
};
use relaxtag::eval::{evaluate, format_accuracy_table, EvalReport};
use relaxtag::lexicon::{build_lexicon, filter_lexicon, parse_corrections, parse_lexicon, write_lexicon, Lexicon};
use relaxtag::model::{ModelSources, TrainedModels};
use relaxtag::ngram::{
    collect_ngrams, ngrams_to_constraints, parse_ngram_table, transition_probabilities, write_ngram_table, Transitions,
};
use relaxtag::relax::{InitMode, RelaxParams};
use relaxtag::synth::{generate_synthetic_corpus, parse_synth_spec};
use relaxtag::tagset::{Tag, TagSet};
use relaxtag::tree::{extract_ambiguity_classes, learn_trees, parse_trees, write_trees, LearnerParams};

use crate::{
    Command, ConstraintsCommand, EvalArgs, LearnerArgs, LexiconCommand, ModelArgs, NgramsCommand, RelaxArgs, StatsArgs,
    SynthArgs, TagArgs, TreesCommand,
};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Stats(a) => stats(a),
        Command::Lexicon(LexiconCommand::Build { corpus, output }) => {
            let mut ts = TagSet::new();
            let sentences = read_corpus(&corpus, &mut ts)?;
            emit(output.as_deref(), &write_lexicon(&build_lexicon(&sentences), &ts))
        }
        Command::Lexicon(LexiconCommand::Filter {
            lexicon,
            corrections,
            output,
        }) => {
            let mut ts = TagSet::new();
            let lex = read_lexicon(&lexicon, &mut ts)?;
            let lex = apply_corrections(lex, &corrections, &ts)?;
            emit(output.as_deref(), &write_lexicon(&lex, &ts))
        }
        Command::Ngrams(NgramsCommand::Collect { corpus, order, output }) => {
            let mut ts = TagSet::new();
            let sentences = read_corpus(&corpus, &mut ts)?;
            let table = collect_ngrams(&sentences, order)?;
            eprintln!(
                "{} distinct {order}-grams, {} occurrences",
                table.counts().len(),
                table.total_ngrams()
            );
            emit(output.as_deref(), &write_ngram_table(&table, &ts))
        }
        Command::Trees(TreesCommand::Learn {
            corpus,
            corrections,
            learner,
            output,
            constraints,
        }) => learn(
            &corpus,
            corrections.as_deref(),
            &learner,
            output.as_deref(),
            constraints.as_deref(),
        ),
        Command::Constraints(ConstraintsCommand::Compile {
            trees,
            lexicon,
            ngrams,
            output,
        }) => compile(
            trees.as_deref(),
            lexicon.as_deref(),
            ngrams.as_deref(),
            output.as_deref(),
        ),
        Command::Constraints(ConstraintsCommand::Check {
            files,
            lexicon,
            tags,
            output,
        }) => check(&files, lexicon.as_deref(), &tags, output.as_deref()),
        Command::Tag(a) => tag(a),
        Command::Eval(a) => eval(a),
        Command::Synth(a) => synth(a),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Writes to `path`, or to stdout when absent.
fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn read_corpus(path: &Path, ts: &mut TagSet) -> Result<Vec<TaggedSentence>> {
    parse_tagged_corpus(&read(path)?, ts, TagPolicy::Accumulate).with_context(|| format!("in {}", path.display()))
}

fn read_lexicon(path: &Path, ts: &mut TagSet) -> Result<Lexicon> {
    parse_lexicon(&read(path)?, ts).with_context(|| format!("in {}", path.display()))
}

fn read_constraints(path: &Path, ts: &TagSet) -> Result<ConstraintFile> {
    parse_constraints(&read(path)?, ts).with_context(|| format!("in {}", path.display()))
}

fn apply_corrections(lex: Lexicon, path: &Path, ts: &TagSet) -> Result<Lexicon> {
    let fixes = parse_corrections(&read(path)?, ts).with_context(|| format!("in {}", path.display()))?;
    Ok(filter_lexicon(&lex, &fixes)?)
}

fn learner_params(a: &LearnerArgs) -> LearnerParams {
    LearnerParams {
        purity_threshold: a.purity,
        min_examples: a.min_examples,
        chi2_alpha: a.chi2_alpha,
        holdout_fraction: a.holdout,
        window: a.window,
        top_k_classes: a.top_classes,
        seed: a.seed,
    }
}

fn relax_params(a: &RelaxArgs, seed: u64) -> Result<RelaxParams> {
    if !(a.divisor.is_finite() && a.divisor > 0.0) {
        bail!("--divisor must be a positive number");
    }
    if !(a.epsilon.is_finite() && a.epsilon >= 0.0) {
        bail!("--epsilon must be non-negative");
    }
    Ok(RelaxParams {
        max_iterations: a.max_iter,
        epsilon: a.epsilon,
        norm: a.support_norm,
        divisor: a.divisor,
        init: if a.random_init {
            InitMode::Random(seed)
        } else {
            InitMode::Lexical
        },
    })
}

fn stats(a: StatsArgs) -> Result<()> {
    let mut ts = TagSet::new();
    let sentences = read_corpus(&a.corpus, &mut ts)?;
    let lex = match &a.lexicon {
        Some(p) => read_lexicon(p, &mut ts)?,
        None => build_lexicon(&sentences),
    };
    let s = corpus_stats(&sentences, &lex, &ts);
    let mut out = String::new();
    writeln!(out, "{:<28}{:>12}", "sentences", sentences.len())?;
    writeln!(out, "{:<28}{:>12}", "words", s.word_count)?;
    writeln!(out, "{:<28}{:>12}", "tags", ts.len())?;
    writeln!(out, "{:<28}{:>12}", "lexicon entries", lex.len())?;
    writeln!(out, "{:<28}{:>11.2}%", "ambiguous words", 100.0 * s.ambiguous_fraction)?;
    writeln!(
        out,
        "{:<28}{:>12.3}",
        "tags per ambiguous word", s.ambiguity_ratio_ambiguous
    )?;
    writeln!(out, "{:<28}{:>12.3}", "tags per word", s.ambiguity_ratio_overall)?;
    let classes = extract_ambiguity_classes(&sentences, &lex, &ts);
    if !classes.is_empty() && a.classes > 0 {
        writeln!(out)?;
        writeln!(out, "{:<28}{:>12}{:>10}", "ambiguity class", "examples", "words")?;
        for c in classes.iter().take(a.classes) {
            writeln!(
                out,
                "{:<28}{:>12}{:>10}",
                c.name(&ts),
                c.example_count,
                c.member_words.len()
            )?;
        }
    }
    writeln!(
        out,
        "stats sentences={} words={} ambiguous_fraction={:.6} ratio_ambiguous={:.6} ratio_overall={:.6} classes={}",
        sentences.len(),
        s.word_count,
        s.ambiguous_fraction,
        s.ambiguity_ratio_ambiguous,
        s.ambiguity_ratio_overall,
        classes.len()
    )?;
    emit(None, &out)
}

fn learn(
    corpus: &Path,
    corrections: Option<&Path>,
    learner: &LearnerArgs,
    output: Option<&Path>,
    constraints_out: Option<&Path>,
) -> Result<()> {
    let mut ts = TagSet::new();
    let sentences = read_corpus(corpus, &mut ts)?;
    let mut lex = build_lexicon(&sentences);
    if let Some(p) = corrections {
        lex = apply_corrections(lex, p, &ts)?;
    }
    let trees = learn_trees(&sentences, &lex, &ts, &learner_params(learner))?;
    eprintln!(
        "{:<24}{:>10}{:>10}{:>10}{:>10}{:>10}{:>12}",
        "class", "examples", "holdout", "unpruned", "nodes", "leaves", "constraints"
    );
    let mut compiled = Vec::new();
    for t in &trees {
        let cs = t.constraints();
        eprintln!(
            "{:<24}{:>10}{:>10}{:>10}{:>10}{:>10}{:>12}",
            t.class.name(&ts),
            t.growth_examples,
            t.holdout_examples,
            t.unpruned_nodes,
            t.tree.node_count(),
            t.tree.leaf_count(),
            cs.len()
        );
        compiled.extend(cs);
    }
    let text = write_trees(trees.iter().map(|t| (&t.class.tags[..], &t.tree)), &ts);
    emit(output, &text)?;
    if let Some(p) = constraints_out {
        let file = ConstraintFile {
            constraints: compiled,
            ..Default::default()
        };
        fs::write(p, serialize_constraints(&file, &ts)).with_context(|| format!("writing {}", p.display()))?;
    }
    // Records share stdout with the tree file unless that went to disk.
    if output.is_none() {
        return Ok(());
    }
    let mut out = String::new();
    for t in &trees {
        writeln!(
            out,
            "tree class={} examples={} holdout={} unpruned_nodes={} nodes={} leaves={}",
            t.class.name(&ts),
            t.growth_examples,
            t.holdout_examples,
            t.unpruned_nodes,
            t.tree.node_count(),
            t.tree.leaf_count()
        )?;
    }
    emit(None, &out)
}

fn compile(trees: Option<&Path>, lexicon: Option<&Path>, ngrams: Option<&Path>, output: Option<&Path>) -> Result<()> {
    let mut ts = TagSet::new();
    let constraints = match (trees, lexicon, ngrams) {
        (Some(trees), Some(lexicon), _) => {
            let lex = read_lexicon(lexicon, &mut ts)?;
            let parsed = parse_trees(&read(trees)?, &ts).with_context(|| format!("in {}", trees.display()))?;
            let mut out = Vec::new();
            for (tags, tree) in &parsed {
                let class: BTreeSet<Tag> = tags.iter().copied().collect();
                let words: Vec<String> = lex
                    .iter()
                    .filter(|(_, e)| e.len() == class.len() && e.keys().all(|t| class.contains(t)))
                    .map(|(w, _)| w.to_string())
                    .collect();
                if words.is_empty() {
                    log::warn!(
                        "no lexicon word has the class {:?}",
                        tags.iter().map(|t| ts.name(*t)).collect::<Vec<_>>()
                    );
                }
                out.extend(compile_tree(tree, tags, &tree.distribution, Some(&words)));
            }
            out
        }
        (None, _, Some(ngrams)) => {
            let table =
                parse_ngram_table(&read(ngrams)?, &mut ts).with_context(|| format!("in {}", ngrams.display()))?;
            ngrams_to_constraints(&table)
        }
        _ => bail!("give either --trees with --lexicon, or --ngrams"),
    };
    eprintln!("{} constraints", constraints.len());
    let file = ConstraintFile {
        constraints,
        ..Default::default()
    };
    emit(output, &serialize_constraints(&file, &ts))
}

fn check(files: &[PathBuf], lexicon: Option<&Path>, tags: &[String], output: Option<&Path>) -> Result<()> {
    let mut ts = TagSet::from_symbols(tags)?;
    if let Some(p) = lexicon {
        read_lexicon(p, &mut ts)?;
    }
    let mut canonical = String::new();
    let mut out = String::new();
    for f in files {
        let file = read_constraints(f, &ts)?;
        let repeated = file.constraints.iter().filter(|c| c.has_repetition()).count();
        let word_targets = file.constraints.iter().filter(|c| c.target.words.is_some()).count();
        writeln!(
            out,
            "constraints file={} macros={} constraints={} repeated={} word_targets={}",
            f.display(),
            file.macros.len(),
            file.constraints.len(),
            repeated,
            word_targets
        )?;
        canonical.push_str(&serialize_constraints(&file, &ts));
    }
    if let Some(p) = output {
        fs::write(p, canonical).with_context(|| format!("writing {}", p.display()))?;
    }
    emit(None, &out)
}

/// Loads or trains every model source. `extra` are corpora whose tags must
/// be known before transition tables are sized.
fn load_models(a: &ModelArgs, ts: &mut TagSet, extra: &[&Path]) -> Result<(TrainedModels, Vec<Vec<TaggedSentence>>)> {
    let params = learner_params(&a.learner);
    let (mut models, corpora) = if let Some(train) = &a.train {
        let sentences = read_corpus(train, ts)?;
        let corpora = extra.iter().map(|p| read_corpus(p, ts)).collect::<Result<Vec<_>>>()?;
        let mut models = TrainedModels::train(&sentences, ts, &params)?;
        if let Some(p) = &a.corrections {
            models.lexicon = apply_corrections(models.lexicon, p, ts)?;
        }
        (models, corpora)
    } else {
        let lexicon_path = a.lexicon.as_ref().context("--lexicon or --train is required")?;
        let mut lexicon = read_lexicon(lexicon_path, ts)?;
        let bigrams = a
            .bigrams
            .as_ref()
            .map(|p| parse_ngram_table(&read(p)?, ts).with_context(|| format!("in {}", p.display())))
            .transpose()?;
        let trigrams = a
            .trigrams
            .as_ref()
            .map(|p| parse_ngram_table(&read(p)?, ts).with_context(|| format!("in {}", p.display())))
            .transpose()?;
        let corpora = extra.iter().map(|p| read_corpus(p, ts)).collect::<Result<Vec<_>>>()?;
        if let Some(p) = &a.corrections {
            lexicon = apply_corrections(lexicon, p, ts)?;
        }
        let learned = a.learned.as_ref().map(|p| read_constraints(p, ts)).transpose()?;
        let transitions = match &bigrams {
            Some(t) => transition_probabilities(t, ts)?,
            None => Transitions::uniform(ts.len()),
        };
        let sources = ModelSources {
            bigrams: bigrams
                .as_ref()
                .map(|t| ConstraintSet::from_constraints(ngrams_to_constraints(t), Source::Bigram)),
            trigrams: trigrams
                .as_ref()
                .map(|t| ConstraintSet::from_constraints(ngrams_to_constraints(t), Source::Trigram)),
            learned: learned.map(|f| ConstraintSet::from_constraints(f.constraints, Source::Learned)),
            hand_written: None,
        };
        let has_bigrams = bigrams.is_some();
        let models = TrainedModels {
            lexicon,
            bigrams: bigrams.unwrap_or(relaxtag::ngram::NgramTable::new(2)?),
            trigrams: trigrams.unwrap_or(relaxtag::ngram::NgramTable::new(3)?),
            transitions,
            trees: Vec::new(),
            sources,
        };
        if !has_bigrams {
            log::info!("no bigram table; HMM decoding uses uniform transitions");
        }
        (models, corpora)
    };
    if let Some(p) = &a.hand {
        let file = read_constraints(p, ts)?;
        models.sources.hand_written = Some(ConstraintSet::from_constraints(file.constraints, Source::HandWritten));
    }
    if !a.open_class.is_empty() {
        let open = a
            .open_class
            .iter()
            .map(|s| ts.lookup(s))
            .collect::<Result<Vec<Tag>, _>>()?;
        ts.set_open_class(open);
    }
    Ok((models, corpora))
}

fn tag(a: TagArgs) -> Result<()> {
    let mut ts = TagSet::new();
    let (models, _) = load_models(&a.models, &mut ts, &[])?;
    let params = relax_params(&a.relax, a.models.learner.seed)?;
    let sentences = parse_untagged(&read(&a.input)?);
    let out = models.tag(a.model, &sentences, &ts, &params)?;
    let tagged: Vec<TaggedSentence> = sentences
        .iter()
        .zip(&out)
        .map(|(words, (tags, _))| TaggedSentence {
            tokens: words
                .iter()
                .zip(tags)
                .map(|(w, t)| relaxtag::corpus::Token {
                    word: w.clone(),
                    tag: *t,
                })
                .collect(),
        })
        .collect();
    emit(a.output.as_deref(), &write_tagged_corpus(&tagged, &ts))?;
    if let Some(p) = &a.diagnostics {
        let mut text = String::new();
        for (k, (_, d)) in out.iter().enumerate() {
            if let Some(d) = d {
                text.push_str(&d.record(k));
                text.push('\n');
            }
        }
        fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let mut ts = TagSet::new();
    let mut extra: Vec<&Path> = vec![&a.gold];
    if let Some(p) = &a.predicted {
        extra.push(p);
    }
    let (models, corpora) = load_models(&a.models, &mut ts, &extra)?;
    let gold = &corpora[0];
    let mut rows: Vec<(String, EvalReport)> = Vec::new();
    if let Some(p) = &a.predicted {
        let predicted: Vec<Vec<Tag>> = corpora[1].iter().map(TaggedSentence::tags).collect();
        if corpora[1].iter().zip(gold).any(|(p, g)| p.words() != g.words()) {
            bail!("{} does not contain the same words as the gold corpus", p.display());
        }
        rows.push((
            p.display().to_string(),
            evaluate(gold, &predicted, &models.lexicon, &ts)?,
        ));
    } else {
        let params = relax_params(&a.relax, a.models.learner.seed)?;
        let words: Vec<Vec<String>> = gold
            .iter()
            .map(|s| s.tokens.iter().map(|t| t.word.clone()).collect())
            .collect();
        for model in &a.combinations {
            let out = models.tag(*model, &words, &ts, &params)?;
            let predicted: Vec<Vec<Tag>> = out.into_iter().map(|(t, _)| t).collect();
            rows.push((model.to_string(), evaluate(gold, &predicted, &models.lexicon, &ts)?));
        }
    }
    let mut out = format_accuracy_table(&rows);
    if a.errors > 0 {
        for (name, r) in &rows {
            writeln!(out)?;
            writeln!(out, "{name}: most frequent errors (gold/predicted)")?;
            write!(out, "{}", r.error_table(&ts, a.errors))?;
        }
    }
    writeln!(out)?;
    for (name, r) in &rows {
        writeln!(out, "{}", r.record(name))?;
    }
    emit(None, &out)
}

fn synth(a: SynthArgs) -> Result<()> {
    let spec = parse_synth_spec(&read(&a.spec)?).with_context(|| format!("in {}", a.spec.display()))?;
    let (ts, sentences) = generate_synthetic_corpus(&spec, a.words, a.seed)?;
    emit(a.output.as_deref(), &write_tagged_corpus(&sentences, &ts))
}
