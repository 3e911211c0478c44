use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "occner",
    version,
    about = "Job-title named entity recognition toolkit"
)]
pub struct Cli {
    /// Output format for reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// key=value file of settings; command-line flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Seed for every randomized step. Required by randomized commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Kv,
    Tsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    /// One raw title per line.
    Lines,
    /// raw<TAB>region<TAB>profile_id
    Tsv,
    /// token<TAB>label, blank line between titles.
    Conll,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Crf,
    Logreg,
    Lstm,
    #[value(name = "lstm-crf")]
    LstmCrf,
    Bilm,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalize raw titles.
    Normalize(Io),
    /// Title length statistics, overall and per region.
    Stats(StatsArgs),
    /// Ranked n-gram counts.
    Ngrams(NgramArgs),
    /// Build a gazetteer from annotator votes, or report their agreement.
    #[command(subcommand)]
    Gazetteer(GazetteerCmd),
    /// Label titles with a gazetteer and write CoNLL.
    Tag(TagArgs),
    /// Seeded train/dev/test split of a CoNLL file.
    Split(SplitArgs),
    /// Train a model.
    Train(TrainArgs),
    /// Label titles with a trained tagger.
    Predict(PredictArgs),
    /// Score predictions against gold labels.
    Eval(EvalArgs),
    /// Annotator baseline: the first set is gold, averaged over the other two.
    Human(HumanArgs),
    /// Side-by-side table of saved metric reports.
    Compare(CompareArgs),
    /// Contextual title embeddings from a trained biLM.
    Embed(EmbedArgs),
    /// Most similar titles in an embedding file.
    Nearest(NearestArgs),
    /// Exhaustive hyperparameter search.
    Gridsearch(GridArgs),
    /// Synthetic title corpus drawn from a gazetteer.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct Io {
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Defaults to standard output.
    #[arg(long = "out", value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = InputFormat::Lines)]
    pub input_format: InputFormat,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub io: Io,
}

#[derive(Debug, Args)]
pub struct NgramArgs {
    #[command(flatten)]
    pub io: Io,
    #[arg(short, long, default_value_t = 1)]
    pub n: usize,
    /// Show only the most frequent entries.
    #[arg(long)]
    pub top: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum GazetteerCmd {
    /// Majority vote over three annotation files (token<TAB>tag).
    Build {
        #[arg(long, num_args = 3, value_name = "PATH", required = true)]
        votes: Vec<PathBuf>,
        #[arg(long = "out", value_name = "PATH")]
        output: Option<PathBuf>,
    },
    /// Percentage agreement, Cohen's kappa and agreement counts.
    Irr {
        #[arg(long, num_args = 3, value_name = "PATH", required = true)]
        votes: Vec<PathBuf>,
        #[arg(long = "out", value_name = "PATH")]
        output: Option<PathBuf>,
    },
    /// Write the built-in gazetteer.
    Builtin {
        #[arg(long = "out", value_name = "PATH")]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct TagArgs {
    #[command(flatten)]
    pub io: Io,
    /// Gazetteer TSV; the built-in one when absent.
    #[arg(long, value_name = "PATH")]
    pub gazetteer: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Labeled CoNLL input.
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Receives train.conll, dev.conll and test.conll.
    #[arg(long = "out", value_name = "DIR")]
    pub output: PathBuf,
    #[arg(long, default_value_t = 0.8)]
    pub train: f64,
    #[arg(long, default_value_t = 0.1)]
    pub dev: f64,
}

#[derive(Debug, Args, Default, Clone)]
pub struct Hyper {
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// sgd or adam.
    #[arg(long)]
    pub optimizer: Option<String>,
    #[arg(long)]
    pub word_dropout: Option<f64>,
    #[arg(long)]
    pub variational_dropout: Option<f64>,
    /// Global gradient-norm bound, or "none".
    #[arg(long)]
    pub grad_clip: Option<String>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub embedding_dim: Option<usize>,
}

impl Hyper {
    pub fn pairs(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k.to_string(), v));
            }
        };
        push("lr", self.lr.map(|v| v.to_string()));
        push("batch", self.batch.map(|v| v.to_string()));
        push("epochs", self.epochs.map(|v| v.to_string()));
        push("optimizer", self.optimizer.clone());
        push("word_dropout", self.word_dropout.map(|v| v.to_string()));
        push(
            "variational_dropout",
            self.variational_dropout.map(|v| v.to_string()),
        );
        push("grad_clip", self.grad_clip.clone());
        push("hidden", self.hidden.map(|v| v.to_string()));
        push("layers", self.layers.map(|v| v.to_string()));
        push("embedding_dim", self.embedding_dim.map(|v| v.to_string()));
        out
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(value_enum)]
    pub model: ModelKind,
    /// Training data: CoNLL for taggers, titles for the biLM.
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub input_format: Option<InputFormat>,
    /// Model file to write.
    #[arg(long = "out", value_name = "PATH")]
    pub output: PathBuf,
    /// Adds gazetteer features to the CRF and LogReg.
    #[arg(long, value_name = "PATH")]
    pub gazetteer: Option<PathBuf>,
    /// Frozen biLM input vectors for the LSTM taggers.
    #[arg(long, value_name = "PATH")]
    pub bilm: Option<PathBuf>,
    #[command(flatten)]
    pub hyper: Hyper,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    /// Required for taggers trained on biLM vectors.
    #[arg(long, value_name = "PATH")]
    pub bilm: Option<PathBuf>,
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Conll)]
    pub input_format: InputFormat,
    #[arg(long = "out", value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_name = "PATH")]
    pub gold: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub pred: PathBuf,
    #[arg(long = "out", value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HumanArgs {
    /// Three CoNLL files over the same titles; the first is gold.
    #[arg(long, num_args = 3, value_name = "PATH", required = true)]
    pub annotations: Vec<PathBuf>,
    #[arg(long = "out", value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// NAME=PATH pairs; each path holds a report written with --format kv.
    #[arg(long = "report", value_name = "NAME=PATH", required = true)]
    pub reports: Vec<String>,
    #[arg(long = "out", value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    #[command(flatten)]
    pub io: Io,
}

#[derive(Debug, Args)]
pub struct NearestArgs {
    #[arg(long, value_name = "PATH")]
    pub embeddings: PathBuf,
    /// Title text to embed with --model.
    #[arg(long, requires = "model", conflicts_with = "query_id")]
    pub query: Option<String>,
    /// Id of a title already in the embedding file.
    #[arg(long)]
    pub query_id: Option<String>,
    #[arg(long, value_name = "PATH")]
    pub model: Option<PathBuf>,
    #[arg(short, long, default_value_t = 5)]
    pub k: usize,
    #[arg(long = "out", value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(value_enum)]
    pub model: ModelKind,
    #[arg(long, value_name = "PATH")]
    pub train: PathBuf,
    /// Validation split, disjoint from training.
    #[arg(long, value_name = "PATH")]
    pub dev: PathBuf,
    /// Axis file (name=v1,v2 per line), or "default" for the built-in space.
    #[arg(long, value_name = "PATH|default", default_value = "default")]
    pub space: String,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, value_name = "PATH")]
    pub gazetteer: Option<PathBuf>,
    /// Also write wall time per configuration.
    #[arg(long)]
    pub timings: bool,
    #[arg(long = "out", value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, value_name = "PATH")]
    pub gazetteer: Option<PathBuf>,
    #[arg(long = "out", value_name = "PATH")]
    pub output: Option<PathBuf>,
}
