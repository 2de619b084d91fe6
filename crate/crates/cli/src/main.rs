//! `gcdkit`: compile grammars, compute masks, decode with test scorers,
//! evaluate predictions and measure mask overhead. Every invocation writes
//! exactly one JSON document to stdout; logs and errors go to stderr.

mod commands;
mod error;
mod inputs;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;

use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "gcdkit",
    version,
    about = "Grammar-constrained decoding toolkit"
)]
struct Cli {
    /// Pretty-print the JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a grammar and report diagnostics.
    Compile(commands::compile::Args),
    /// Build the grammar for a task instance and print it.
    Build(commands::build::Args),
    /// Tokens allowed after a byte prefix.
    Mask(commands::mask::Args),
    /// Constrained beam search with a test scorer.
    Decode(commands::decode::Args),
    /// Score predictions against gold outputs.
    Eval(commands::eval::Args),
    /// Per-token mask overhead over a random admissible walk.
    Bench(commands::bench::Args),
}

/// A result document, possibly paired with a failed check that sets the
/// exit status.
pub struct Output {
    pub doc: Value,
    pub failure: Option<CliError>,
}

impl From<Value> for Output {
    fn from(doc: Value) -> Self {
        Output { doc, failure: None }
    }
}

fn run(command: Command) -> error::Result<Output> {
    match command {
        Command::Compile(a) => commands::compile::run(a),
        Command::Build(a) => commands::build::run(a),
        Command::Mask(a) => commands::mask::run(a),
        Command::Decode(a) => commands::decode::run(a),
        Command::Eval(a) => commands::eval::run(a),
        Command::Bench(a) => commands::bench::run(a),
    }
}

fn render(doc: &Value, pretty: bool) -> String {
    if pretty {
        serde_json::to_string_pretty(doc).expect("JSON values serialize")
    } else {
        doc.to_string()
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let err = CliError::format("usage", e.render().to_string().trim());
            println!("{}", err.to_json());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code());
        }
    };
    let pretty = cli.pretty;
    let (doc, failure) = match run(cli.command) {
        Ok(out) => (out.doc, out.failure),
        Err(e) => (e.to_json(), Some(e)),
    };
    let mut stdout = std::io::stdout().lock();
    if writeln!(stdout, "{}", render(&doc, pretty))
        .and_then(|_| stdout.flush())
        .is_err()
    {
        return ExitCode::from(2);
    }
    match failure {
        None => ExitCode::SUCCESS,
        Some(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
