//! `gas`: ingest, train, evaluate and inspect gloss-augmented WSD models.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gas_core::model::UpdateRule;

#[derive(Parser, Debug)]
#[command(name = "gas", version, about = "Gloss-augmented word sense disambiguation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Run seed.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Worker threads for data-parallel stages (0 = all cores).
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Hidden units per LSTM direction.
    #[arg(long, default_value_t = 256)]
    pub hidden: usize,
    /// Memory passes.
    #[arg(long, default_value_t = 3)]
    pub passes: usize,
    /// Memory update rule: linear or concat.
    #[arg(long, default_value = "concat")]
    pub update: UpdateRule,
    /// Gloss expansion depth.
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    /// Use hypernym/hyponym glosses with the fusion layer.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub extended: bool,
    #[arg(long, default_value_t = 0.5)]
    pub dropout: f64,
    #[arg(long, default_value_t = 32)]
    pub max_gloss_tokens: usize,
    /// Per-side cap on expanded gloss lists.
    #[arg(long)]
    pub max_expansion: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct TrainArgs {
    #[arg(long, default_value_t = 0.001)]
    pub lr: f64,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 10)]
    pub patience: usize,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    /// Keep corpus order instead of shuffling each epoch.
    #[arg(long)]
    pub no_shuffle: bool,
}

#[derive(Args, Debug, Clone)]
pub struct DataArgs {
    #[arg(long)]
    pub inventory: PathBuf,
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub dev: PathBuf,
    #[arg(long)]
    pub embeddings: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert a WordNet database directory to an inventory TSV.
    Ingest {
        /// Directory holding data.noun, data.verb, ... and optionally index.*.
        #[arg(long)]
        wordnet: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Train a model and write its best checkpoint.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long)]
        out: PathBuf,
        /// Training log (JSON lines). Defaults to `<out>.log`.
        #[arg(long)]
        log: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Score a checkpoint against a labeled corpus.
    Eval {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        inventory: PathBuf,
        /// Training corpus for the most-frequent-sense backoff.
        #[arg(long)]
        mfs_train: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Write `instance_id<TAB>sense_id<TAB>prob` for every instance.
    Disambiguate {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        inventory: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        mfs_train: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Export per-pass attention weights.
    Trace {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        inventory: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Train one model per pass count and tabulate test F1.
    SweepPasses {
        #[arg(long, default_value_t = 1)]
        min: usize,
        #[arg(long, default_value_t = 5)]
        max: usize,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        test: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        train: TrainArgs,
        /// Also write the table here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare analytic and finite-difference gradients on a micro model.
    GradCheck {
        #[arg(long, default_value_t = 8)]
        hidden: usize,
        #[arg(long, default_value_t = 2)]
        passes: usize,
        /// linear, concat or both.
        #[arg(long, default_value = "both")]
        update: String,
        /// Embedding dimension.
        #[arg(long, default_value_t = 6)]
        dim: usize,
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
        #[command(flatten)]
        common: Common,
    },
}

/// Exit status classes.
pub enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Ingest { wordnet, out, common: _ } => commands::ingest(&wordnet, &out),
        Command::Train { data, model, train, out, log, common } => {
            commands::train(&data, &model, &train, &out, log.as_deref(), &common)
        }
        Command::Eval { ckpt, test, inventory, mfs_train, common } => {
            commands::eval(&ckpt, &test, &inventory, mfs_train.as_deref(), &common)
        }
        Command::Disambiguate { ckpt, input, inventory, out, mfs_train, common } => {
            commands::disambiguate(&ckpt, &input, &inventory, &out, mfs_train.as_deref(), &common)
        }
        Command::Trace { ckpt, input, inventory, out, common } => commands::trace(&ckpt, &input, &inventory, &out, &common),
        Command::SweepPasses { min, max, data, test, model, train, out, common } => {
            if min == 0 || min > max {
                return Err(Failure::Usage(format!("invalid pass range {min}..={max}")));
            }
            commands::sweep(min, max, &data, &test, &model, &train, out.as_deref(), &common)
        }
        Command::GradCheck { hidden, passes, update, dim, depth, tolerance, common } => {
            let rules = match update.as_str() {
                "both" => vec![UpdateRule::Linear, UpdateRule::Concatenation],
                other => vec![other.parse::<UpdateRule>().map_err(Failure::Usage)?],
            };
            commands::grad_check(hidden, passes, &rules, dim, depth, tolerance, &common)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
