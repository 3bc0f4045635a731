use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use structdict::classify::ClassifierKind;
use structdict::dataset::SplitMode;
use structdict::learning::{CodeUpdateMode, Hyperparameters, InitMethod};

#[derive(Parser, Debug)]
#[command(name = "structdict", version)]
#[command(about = "Structured dictionary learning with cross-label suppression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Learn a dictionary and write it as a model file
    Train(TrainArgs),
    /// Classify every sample of a dataset with a saved model
    Predict(PredictArgs),
    /// Accuracy, per-class accuracy and confusion matrix
    Eval(EvalArgs),
    /// Cross-validate a (beta, lambda, gamma) grid and both classifiers
    Crossval(CrossvalArgs),
    /// Mean absolute code profiles and block-mass ratios per class
    Inspect(InspectArgs),
    /// Training wall-clock and per-query classification time
    Bench(BenchArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    JsonLines,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Seq,
    Batch,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Init {
    ClassKmeans,
    Random,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ClassifierChoice {
    Gcc,
    Lcc,
    Auto,
}

impl ClassifierChoice {
    pub fn fixed(self) -> Option<ClassifierKind> {
        match self {
            ClassifierChoice::Gcc => Some(ClassifierKind::Gcc),
            ClassifierChoice::Lcc => Some(ClassifierKind::Lcc),
            ClassifierChoice::Auto => None,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Random seed, echoed in every report header
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Report destination; standard output when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct LearnArgs {
    /// Label-particular atoms per class [default: smallest training class size - 1]
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub atoms_per_class: Option<u32>,

    /// Shared atoms
    #[arg(long, default_value_t = 0)]
    pub shared: usize,

    #[arg(long, default_value_t = 2e-3)]
    pub beta: f64,

    #[arg(long, default_value_t = 2e2)]
    pub lambda: f64,

    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,

    #[arg(long, default_value_t = 30)]
    pub max_iters: usize,

    #[arg(long, default_value_t = 1e-4)]
    pub rel_tol: f64,

    #[arg(long, value_enum, default_value_t = Mode::Seq)]
    pub mode: Mode,

    #[arg(long, value_enum, default_value_t = Init::ClassKmeans)]
    pub init: Init,

    /// Update particular atoms from their own class only (needs lambda >= 100)
    #[arg(long)]
    pub fast_particular_update: bool,
}

impl LearnArgs {
    pub fn hyperparameters(&self, seed: u64) -> Hyperparameters {
        Hyperparameters {
            beta: self.beta,
            lambda: self.lambda,
            gamma: self.gamma,
            max_iters: self.max_iters,
            rel_tol: self.rel_tol,
            code_update_mode: match self.mode {
                Mode::Seq => CodeUpdateMode::Sequential,
                Mode::Batch => CodeUpdateMode::Batch,
            },
            fast_particular_update: self.fast_particular_update,
            init: match self.init {
                Init::ClassKmeans => InitMethod::ClassKMeans,
                Init::Random => InitMethod::RandomSamples,
            },
            seed,
            ..Default::default()
        }
    }
}

#[derive(Args, Debug, Clone)]
#[group(multiple = false)]
pub struct SplitArgs {
    /// Training samples per class for each split
    #[arg(long, value_name = "N")]
    pub split_per_class: Option<usize>,

    /// Fraction of every class used for training
    #[arg(long, value_name = "F")]
    pub split_fraction: Option<f64>,
}

impl SplitArgs {
    pub fn mode(&self) -> Option<SplitMode> {
        self.split_per_class
            .map(SplitMode::PerClassCount)
            .or(self.split_fraction.map(SplitMode::Fraction))
    }
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Labeled training set (.csv or XLDD binary)
    #[arg(long)]
    pub data: PathBuf,

    /// Model file to write
    #[arg(long, default_value = "model.xldm")]
    pub model: PathBuf,

    /// Classifier stored in the model; auto picks by cross-validation
    #[arg(long, value_enum, default_value_t = ClassifierChoice::Gcc)]
    pub classifier: ClassifierChoice,

    /// Folds for --classifier auto
    #[arg(long, default_value_t = 5)]
    pub folds: usize,

    #[command(flatten)]
    pub learn: LearnArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,

    /// Samples to classify; a CSV without a label column is accepted
    #[arg(long)]
    pub data: PathBuf,

    /// Overrides the classifier stored in the model
    #[arg(long, value_enum)]
    pub classifier: Option<ClassifierChoice>,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Saved model; evaluated on --test without training
    #[arg(long)]
    pub model: Option<PathBuf>,

    /// Labeled data to train on, or to split with --split-*
    #[arg(long, required_unless_present = "model")]
    pub data: Option<PathBuf>,

    /// Labeled test set
    #[arg(long, required_unless_present = "data")]
    pub test: Option<PathBuf>,

    #[command(flatten)]
    pub split: SplitArgs,

    /// Seeded train/test runs, seeds seed..seed+repeats
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub repeats: u32,

    /// Worker threads for --repeats
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub jobs: u32,

    #[arg(long, value_enum, default_value_t = ClassifierChoice::Gcc)]
    pub classifier: ClassifierChoice,

    /// Folds for --classifier auto
    #[arg(long, default_value_t = 5)]
    pub folds: usize,

    #[command(flatten)]
    pub learn: LearnArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct CrossvalArgs {
    #[arg(long)]
    pub data: PathBuf,

    #[arg(long, default_value_t = 5)]
    pub folds: usize,

    /// Candidate betas [default: --beta]
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub grid_beta: Vec<f64>,

    /// Candidate lambdas [default: 0.2,2,20,200,2000]
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub grid_lambda: Vec<f64>,

    /// Candidate gammas [default: --gamma]
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub grid_gamma: Vec<f64>,

    #[command(flatten)]
    pub learn: LearnArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct InspectArgs {
    #[arg(long)]
    pub model: PathBuf,

    /// Labeled samples whose codes are profiled
    #[arg(long)]
    pub data: PathBuf,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Labeled training set
    #[arg(long)]
    pub data: PathBuf,

    /// Query samples [default: --data]
    #[arg(long)]
    pub test: Option<PathBuf>,

    /// Also write the trained model here
    #[arg(long)]
    pub model: Option<PathBuf>,

    /// Timed queries, cycling through the query set
    #[arg(long, default_value_t = 100)]
    pub queries: usize,

    #[command(flatten)]
    pub learn: LearnArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}
