//! implicert: certificate finding for blackbox Boolean classifiers.
//!
//! One job per process invocation; every report echoes enough state to
//! re-run the job exactly. Exit codes: 0 success (a Bottom verdict is a
//! result, not a failure), 1 usage or parse error, 2 internal invariant
//! violation.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use implicert_core::model::ModelExpr;
use implicert_core::tree::ScoreMode;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, unreadable inputs, model/instance validation: exit 1.
    Usage(String),
    /// A broken internal invariant (failed selftest): exit 2.
    Internal(String),
}

impl From<implicert_core::Error> for CliError {
    fn from(e: implicert_core::Error) -> CliError {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Usage(format!("i/o error: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "implicert",
    version,
    about = "Query-access certificates for blackbox Boolean classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find and verify a certificate for one instance
    Certify(commands::certify::CertifyArgs),
    /// Certify a set of instances against one shared implicit tree
    CertifyBatch(commands::certify::BatchArgs),
    /// Exact small-dimension oracle computations
    Oracle(commands::oracle::OracleArgs),
    /// Experiment runners
    Bench(commands::bench::BenchArgs),
    /// Run the oracle-vs-estimator cross-check suite
    Selftest(commands::selftest::SelftestArgs),
}

/// Model source: a file path or inline DSL text, exactly one.
#[derive(Args, Serialize, Clone)]
pub struct ModelArgs {
    /// Path to a model file in the s-expression DSL
    #[arg(
        long,
        value_name = "PATH",
        required_unless_present = "model_inline",
        conflicts_with = "model_inline"
    )]
    model: Option<PathBuf>,
    /// Inline model DSL text, e.g. "(xor x3 x7) d=10"
    #[arg(long, value_name = "DSL")]
    model_inline: Option<String>,
}

impl ModelArgs {
    pub fn load(&self) -> CliResult<ModelExpr> {
        let text = match (&self.model, &self.model_inline) {
            (Some(path), None) => std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?,
            (None, Some(text)) => text.clone(),
            _ => return Err(CliError::Usage("give exactly one of --model / --model-inline".into())),
        };
        Ok(ModelExpr::parse(text.trim())?)
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    /// Monte-Carlo estimates through query access
    Mc,
    /// Exact oracle scores over a materialized truth table
    Exact,
}

impl ModeArg {
    pub fn to_score_mode(self) -> ScoreMode {
        match self {
            ModeArg::Mc => ScoreMode::MonteCarlo,
            ModeArg::Exact => ScoreMode::ExactOracle,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatArg {
    Json,
    /// Benchmark tables only
    Csv,
}

#[derive(Args, Serialize, Clone)]
pub struct OutputArgs {
    /// Write the report here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format (csv is limited to benchmark tables)
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

impl OutputArgs {
    pub fn format(&self) -> FormatArg {
        self.format
    }

    pub fn write(&self, payload: &str) -> CliResult<()> {
        match &self.out {
            Some(path) => std::fs::write(path, payload)
                .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
            None => {
                println!("{payload}");
                Ok(())
            }
        }
    }

    /// Rejects CSV for commands without a tabular payload.
    pub fn require_json(&self, command: &str) -> CliResult<()> {
        if self.format == FormatArg::Csv {
            return Err(CliError::Usage(format!(
                "--format csv is only supported by benchmark tables, not `{command}`"
            )));
        }
        Ok(())
    }
}

/// Installs the global worker pool; 0 means one worker per core.
pub fn install_thread_pool(threads: usize) -> CliResult<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Internal(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Certify(args) => commands::certify::run_certify(args),
        Command::CertifyBatch(args) => commands::certify::run_batch(args),
        Command::Oracle(args) => commands::oracle::run(args),
        Command::Bench(args) => commands::bench::run(args),
        Command::Selftest(args) => commands::selftest::run(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}
