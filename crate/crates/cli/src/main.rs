//! Batch front end for the classifier toolkit.
//!
//! Four subcommands: `train` one model, `predict` with a saved model,
//! dump a `kernel` Gram matrix, or `benchmark` a models x feature-maps
//! grid. Every run is fully determined by (config, flags, seed, input),
//! so identical invocations produce identical output bytes.

mod bundle;
mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::Settings;
use helixq_core::Error;

#[derive(Parser)]
#[command(
    name = "helixq",
    version,
    about = "Quantum kernel and variational classifiers for DNA sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train one classifier; writes model.json, metrics.json and, for
    /// variational models, trace.csv into the output directory
    Train(RunArgs),
    /// Score sequences from a CSV with a trained model file
    Predict(PredictArgs),
    /// Write the Gram matrix of the training split as CSV
    Kernel(RunArgs),
    /// Train every model x feature-map cell and write a summary table
    Benchmark(RunArgs),
}

/// Options shared by train, kernel and benchmark. All of them can also be
/// given as `key = value` lines in --config; flags win on conflict.
#[derive(Args)]
struct RunArgs {
    /// Key=value config file; command-line flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input sequences: .csv (sequence,label) or FASTA with label= headers
    #[arg(long)]
    data: Option<String>,
    /// Input format override: csv or fasta (default: by file extension)
    #[arg(long)]
    format: Option<String>,
    /// Classifier: qsvc, pegasos, vqc or qnn
    #[arg(long)]
    model: Option<String>,
    /// Feature map kind: z, zz or pauli
    #[arg(long)]
    feature_map: Option<String>,
    /// Feature map repetitions
    #[arg(long)]
    reps: Option<String>,
    /// Feature map entanglement: full or linear
    #[arg(long)]
    entanglement: Option<String>,
    /// Comma-separated Pauli words for pauli maps, e.g. Z,YY
    #[arg(long)]
    pauli_strings: Option<String>,
    /// Qubit count; also the number of retained PCA components
    #[arg(long)]
    qubits: Option<String>,
    /// k-mer length for sequence vectorization
    #[arg(long)]
    kmer: Option<String>,
    /// Fraction of rows held out for testing
    #[arg(long)]
    test_fraction: Option<String>,
    /// Global seed; each stage derives its own by adding a fixed index
    #[arg(long)]
    seed: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<String>,
    /// Use only the first N input records
    #[arg(long)]
    limit: Option<String>,
    /// SVM box constraint C
    #[arg(long)]
    cost: Option<String>,
    /// SVM duality-gap stopping tolerance
    #[arg(long)]
    svm_tol: Option<String>,
    /// SVM pair-update budget
    #[arg(long)]
    max_passes: Option<String>,
    /// Pegasos regularization strength
    #[arg(long)]
    lambda: Option<String>,
    /// Pegasos step count
    #[arg(long)]
    steps: Option<String>,
    /// Variational optimizer: gd or spsa (default: gd for qnn, spsa for vqc)
    #[arg(long)]
    optimizer: Option<String>,
    /// Optimizer learning rate
    #[arg(long)]
    learning_rate: Option<String>,
    /// Optimizer iteration budget
    #[arg(long)]
    max_iters: Option<String>,
    /// Optimizer stopping tolerance
    #[arg(long)]
    tolerance: Option<String>,
    /// Ansatz rotation layer count
    #[arg(long)]
    ansatz_layers: Option<String>,
    /// Ansatz entangler: ring or linear
    #[arg(long)]
    ansatz_entangler: Option<String>,
    /// Benchmark model list, comma separated
    #[arg(long)]
    models: Option<String>,
    /// Benchmark feature map list, comma separated
    #[arg(long)]
    feature_maps: Option<String>,
}

impl RunArgs {
    fn settings(&self) -> helixq_core::Result<Settings> {
        let mut flags: Vec<(&'static str, String)> = Vec::new();
        {
            let mut add = |key: &'static str, value: &Option<String>| {
                if let Some(v) = value {
                    flags.push((key, v.clone()));
                }
            };
            add("data", &self.data);
            add("format", &self.format);
            add("model", &self.model);
            add("feature-map", &self.feature_map);
            add("reps", &self.reps);
            add("entanglement", &self.entanglement);
            add("pauli-strings", &self.pauli_strings);
            add("qubits", &self.qubits);
            add("kmer", &self.kmer);
            add("test-fraction", &self.test_fraction);
            add("seed", &self.seed);
            add("out", &self.out);
            add("limit", &self.limit);
            add("cost", &self.cost);
            add("svm-tol", &self.svm_tol);
            add("max-passes", &self.max_passes);
            add("lambda", &self.lambda);
            add("steps", &self.steps);
            add("optimizer", &self.optimizer);
            add("learning-rate", &self.learning_rate);
            add("max-iters", &self.max_iters);
            add("tolerance", &self.tolerance);
            add("ansatz-layers", &self.ansatz_layers);
            add("ansatz-entangler", &self.ansatz_entangler);
            add("models", &self.models);
            add("feature-maps", &self.feature_maps);
        }
        Settings::resolve(self.config.as_deref(), &flags)
    }
}

#[derive(Args)]
struct PredictArgs {
    /// Trained model file written by `train` (model.json)
    #[arg(long)]
    model_file: PathBuf,
    /// CSV with a sequence column (a label column is accepted and ignored)
    #[arg(long)]
    data: PathBuf,
    /// Output CSV path
    #[arg(long, default_value = "predictions.csv")]
    out: PathBuf,
}

fn run(cli: Cli) -> helixq_core::Result<i32> {
    match cli.command {
        Cmd::Train(args) => {
            commands::cmd_train(&args.settings()?)?;
            Ok(0)
        }
        Cmd::Predict(args) => {
            commands::cmd_predict(&args.model_file, &args.data, &args.out)?;
            Ok(0)
        }
        Cmd::Kernel(args) => {
            commands::cmd_kernel(&args.settings()?)?;
            Ok(0)
        }
        Cmd::Benchmark(args) => commands::cmd_benchmark(&args.settings()?),
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Usage(_) | Error::Config(_) => 2,
                _ => 1,
            }
        }
    };
    std::process::exit(code);
}
