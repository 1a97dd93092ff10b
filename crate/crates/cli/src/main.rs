//! `incver`: parse Mini programs, evaluate arithmetic, and verify reliability
//! or safety, optionally reusing the analysis of a previous version.
//!
//! ```text
//! incver parse v1.mini [--grammar mini|arith] [--format text|json]
//! incver eval-expr "5*4+2+6*7*8"
//! incver verify v1.mini --schema reliability --profile profile.json
//! incver verify v2.mini --schema safety --automaton automaton.json [--unroll 3]
//! incver diff-verify v1.mini v2.mini --schema safety --automaton automaton.json
//! ```
//!
//! Exit status: 0 on success or a safe verdict, 1 for an unsafe verdict, 2 for
//! usage, input and syntax errors.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use incver_cli::{
    cmd_diff_verify, cmd_eval_expr, cmd_parse, cmd_verify, report_exit_code, CliError, GrammarKind, Report,
    SchemaKind, VerifyOptions,
};
use incver_core::safety::DEFAULT_UNROLL;

#[derive(Parser)]
#[command(name = "incver", version, about = "Incremental verification of Mini programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a program and dump its syntax tree.
    Parse {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "mini")]
        grammar: GrammarKind,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Evaluate an arithmetic expression over `+` and `*`.
    EvalExpr { expression: String },
    /// Verify a program from scratch.
    Verify {
        file: PathBuf,
        #[command(flatten)]
        options: VerifyArgs,
    },
    /// Verify the old version from scratch and the new one incrementally.
    DiffVerify {
        old: PathBuf,
        new: PathBuf,
        #[command(flatten)]
        options: VerifyArgs,
    },
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    schema: SchemaKind,
    /// Usage profile (reliability).
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Property automaton (safety).
    #[arg(long)]
    automaton: Option<PathBuf>,
    /// Loop unrolling bound (safety).
    #[arg(long, default_value_t = DEFAULT_UNROLL)]
    unroll: usize,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

impl VerifyArgs {
    fn options(&self) -> VerifyOptions {
        VerifyOptions {
            schema: self.schema,
            profile: self.profile.clone(),
            automaton: self.automaton.clone(),
            unroll: self.unroll,
        }
    }
}

/// Writes to stdout; a closed pipe is not an error.
fn output(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn emit(report: &Report, format: Format) -> i32 {
    match format {
        Format::Text => output(&report.to_text()),
        Format::Json => output(&format!("{}\n", report.to_json())),
    }
    report_exit_code(report)
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Parse { file, grammar, format } => {
            let dump = cmd_parse(&file, grammar)?;
            match format {
                Format::Text => output(&dump.to_text()),
                Format::Json => output(&format!("{}\n", dump.to_json())),
            }
            Ok(0)
        }
        Command::EvalExpr { expression } => {
            output(&format!("{}\n", cmd_eval_expr(&expression)?));
            Ok(0)
        }
        Command::Verify { file, options } => Ok(emit(&cmd_verify(&file, &options.options())?, options.format)),
        Command::DiffVerify { old, new, options } => {
            Ok(emit(&cmd_diff_verify(&old, &new, &options.options())?, options.format))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
