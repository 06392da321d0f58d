//! Command-line front end: corpus statistics, lexicon and n-gram
//! collection, tree learning, constraint compilation, tagging and
//! evaluation.

mod commands;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use relaxtag::model::ModelCombination;
use relaxtag::relax::SupportNorm;
use relaxtag::tree::Window;

#[derive(Parser, Debug)]
#[command(
    name = "relaxtag",
    version,
    about = "Hybrid POS tagging with learned and hand-written constraints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Token and ambiguity figures of a tagged corpus.
    Stats(StatsArgs),
    /// Build or filter a lexicon.
    #[command(subcommand)]
    Lexicon(LexiconCommand),
    /// Collect n-gram counts.
    #[command(subcommand)]
    Ngrams(NgramsCommand),
    /// Learn decision trees.
    #[command(subcommand)]
    Trees(TreesCommand),
    /// Compile or check constraint files.
    #[command(subcommand)]
    Constraints(ConstraintsCommand),
    /// Tag untagged text.
    Tag(TagArgs),
    /// Tag a gold corpus with one or more models and score the output.
    Eval(EvalArgs),
    /// Generate a synthetic tagged corpus from a JSON generator spec.
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
struct StatsArgs {
    /// Tagged corpus, one sentence per line of `word_TAG` tokens.
    #[arg(long)]
    corpus: PathBuf,
    /// Lexicon used for ambiguity; built from the corpus when absent.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Number of ambiguity classes to list.
    #[arg(long, default_value_t = 10)]
    classes: usize,
}

#[derive(Subcommand, Debug)]
enum LexiconCommand {
    /// Count word/tag pairs in a tagged corpus.
    Build {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Drop tags not allowed by a corrections file (`word TAG TAG ...`).
    Filter {
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        corrections: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum NgramsCommand {
    /// Count tag n-grams of one order.
    Collect {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum TreesCommand {
    /// Learn one pruned tree per frequent ambiguity class.
    Learn {
        #[arg(long)]
        corpus: PathBuf,
        /// Apply a corrections file to the lexicon before learning.
        #[arg(long)]
        corrections: Option<PathBuf>,
        #[command(flatten)]
        learner: LearnerArgs,
        /// Tree file.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the compiled constraints here.
        #[arg(long)]
        constraints: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum ConstraintsCommand {
    /// Turn a tree file or an n-gram table into constraints.
    Compile {
        /// Tree file written by `trees learn`.
        #[arg(long, requires = "lexicon", conflicts_with = "ngrams")]
        trees: Option<PathBuf>,
        /// Lexicon giving each class its member words.
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// N-gram table written by `ngrams collect`.
        #[arg(long, required_unless_present = "trees")]
        ngrams: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Parse constraint files and report what they contain.
    Check {
        files: Vec<PathBuf>,
        /// Lexicon supplying the tag set.
        #[arg(long, required_unless_present = "tags")]
        lexicon: Option<PathBuf>,
        /// Tag set, instead of a lexicon; space-separated since `,` is a
        /// common tag.
        #[arg(long, value_delimiter = ' ')]
        tags: Vec<String>,
        /// Write the files back in canonical form, concatenated.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
struct LearnerArgs {
    /// Context window as `left,right`.
    #[arg(long, default_value = "3,2", value_parser = parse_window)]
    window: Window,
    /// A node whose majority share reaches this becomes a leaf.
    #[arg(long, default_value_t = 0.99)]
    purity: f64,
    /// Nodes with fewer examples become leaves.
    #[arg(long, default_value_t = 10)]
    min_examples: usize,
    /// Significance level of the branch-merging test.
    #[arg(long, default_value_t = 0.05)]
    chi2_alpha: f64,
    /// Share of each class's examples held out for pruning.
    #[arg(long, default_value_t = 0.10)]
    holdout: f64,
    /// Number of most frequent ambiguity classes to learn.
    #[arg(long, default_value_t = 40)]
    top_classes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Clone)]
struct RelaxArgs {
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
    /// Stop when no weight moves more than this.
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, default_value = "rational")]
    support_norm: SupportNorm,
    /// Raw supports are divided by this before normalization.
    #[arg(long, default_value_t = 1.0)]
    divisor: f64,
    /// Start from random weights seeded by `--seed` instead of lexical ones.
    #[arg(long)]
    random_init: bool,
}

/// Where the models come from: a training corpus, or saved artifacts.
#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Train lexicon, n-grams and trees from this tagged corpus.
    #[arg(long, conflicts_with_all = ["lexicon", "bigrams", "trigrams", "learned"])]
    train: Option<PathBuf>,
    #[arg(long, required_unless_present = "train")]
    lexicon: Option<PathBuf>,
    /// Bigram table (enables B and HMM).
    #[arg(long)]
    bigrams: Option<PathBuf>,
    /// Trigram table (enables T).
    #[arg(long)]
    trigrams: Option<PathBuf>,
    /// Learned constraints (enables C).
    #[arg(long)]
    learned: Option<PathBuf>,
    /// Hand-written constraints (enables H).
    #[arg(long)]
    hand: Option<PathBuf>,
    /// Lexicon corrections applied before tagging.
    #[arg(long)]
    corrections: Option<PathBuf>,
    /// Space-separated tags allowed for unknown words.
    #[arg(long, value_delimiter = ' ')]
    open_class: Vec<String>,
    #[command(flatten)]
    learner: LearnerArgs,
}

#[derive(Args, Debug)]
struct TagArgs {
    #[command(flatten)]
    models: ModelArgs,
    #[command(flatten)]
    relax: RelaxArgs,
    /// Model combination: ML, HMM, or letters from B, T, C, H.
    #[arg(long = "models", default_value = "B,T,C")]
    model: ModelCombination,
    /// Untagged text, one sentence per line.
    #[arg(long)]
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Per-sentence relaxation records.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    models: ModelArgs,
    #[command(flatten)]
    relax: RelaxArgs,
    /// Model combinations to compare.
    #[arg(long = "models", num_args = 1.., value_delimiter = ' ', default_values = ["ML", "HMM", "B"])]
    combinations: Vec<ModelCombination>,
    /// Gold tagged corpus.
    #[arg(long)]
    gold: PathBuf,
    /// Score this tagged file instead of running models.
    #[arg(long)]
    predicted: Option<PathBuf>,
    /// Error pairs listed per model.
    #[arg(long, default_value_t = 5)]
    errors: usize,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// JSON generator spec.
    #[arg(long)]
    spec: PathBuf,
    /// Minimum number of words to generate.
    #[arg(long, default_value_t = 10_000)]
    words: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_window(s: &str) -> Result<Window, String> {
    let (l, r) = s.split_once(',').ok_or("expected `left,right`")?;
    let left: u8 = l.trim().parse().map_err(|_| format!("invalid left width {l:?}"))?;
    let right: u8 = r.trim().parse().map_err(|_| format!("invalid right width {r:?}"))?;
    Ok(Window { left, right })
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(cli.command) {
        // A closed pipe (`| head`) is not a failure.
        Err(e) if is_broken_pipe(&e) => Ok(()),
        r => r,
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain()
        .filter_map(|c| c.downcast_ref::<std::io::Error>())
        .any(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
}
