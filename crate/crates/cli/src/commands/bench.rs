use std::path::PathBuf;

use gcdkit::overhead::{measure_overhead, OverheadError};
use serde_json::json;

use crate::error::{CliError, Result};
use crate::{inputs, Output};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    grammar: PathBuf,
    /// Lexset binding NAME=PATH; repeatable.
    #[arg(long = "catalog", value_parser = inputs::parse_binding)]
    catalogs: Vec<(String, PathBuf)>,
    /// Vocabulary JSON, or synth:SIZE[:SEED].
    #[arg(long)]
    vocab: String,
    /// Walk length (at least 100).
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

pub fn run(a: Args) -> Result<Output> {
    let g = inputs::grammar(&a.grammar, &a.catalogs)?;
    let r = inputs::recognizer(&g)?;
    let vocab = inputs::vocabulary(&a.vocab)?;
    let name = a
        .grammar
        .file_stem()
        .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    let report = measure_overhead(&name, &r, &vocab, a.steps, a.seed).map_err(|e| match e {
        OverheadError::TooFewSteps(_) => CliError::format("usage", e),
        other => CliError::invalid("bench", other),
    })?;
    Ok(json!(report).into())
}
