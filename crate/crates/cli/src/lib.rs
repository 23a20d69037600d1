//! `rspscrn`: batch scoring, evaluation, model tooling and the service
//! launcher.
//!
//! Exit status is 0 on success, 1 for usage errors and 2 for bad input data
//! or any failure while processing it.

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::CliError;

#[derive(Debug, Parser)]
#[command(name = "rspscrn", version, about = "Respiratory-sound screening tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP scoring service.
    Serve {
        /// Service config JSON; falls back to $RSPSCRN_CONFIG.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Score every recording listed in a manifest CSV.
    Score {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        models: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dump the log-mel spectrogram of one WAV file.
    Features {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// ROC and AUC from a scores CSV with labels.
    Eval {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a seeded random model file.
    GenModel {
        #[arg(long)]
        category: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 64)]
        input_dim: usize,
        #[arg(long, default_value_t = 128)]
        hidden_dim: usize,
    },
    /// Print a model file's manifest and parameter count.
    InspectModel { file: PathBuf },
    /// Train the symptom decision tree.
    TrainTree {
        /// CSV with the fourteen questionnaire columns and `label`.
        #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
        data: Option<PathBuf>,
        /// Train on this many synthetic records instead.
        #[arg(long)]
        synthetic: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        max_depth: usize,
        #[arg(long, default_value_t = 5)]
        min_leaf: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a runnable service directory: random models, a synthetic tree,
    /// fusion weights and service.json.
    DemoSetup {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 128)]
        hidden_dim: usize,
    },
    /// Screen one person through a running service.
    Screen {
        /// Server root URL.
        #[arg(long, default_value = "http://127.0.0.1:8080")]
        server: String,
        /// Questionnaire answers as JSON.
        #[arg(long)]
        symptoms: Option<PathBuf>,
        /// Recordings as `<category>=<wav path>`; repeatable.
        #[arg(long = "audio", value_name = "CATEGORY=PATH")]
        audio: Vec<String>,
    },
}

/// Parses `args` and runs the command, returning the exit status.
pub fn run(args: impl IntoIterator<Item = impl Into<OsString> + Clone>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
