use std::path::PathBuf;

use gcdkit::compute_mask;
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
    /// Output so far: hex:<digits> or a literal string.
    #[arg(long, default_value = "")]
    prefix_bytes: String,
}

pub fn run(a: Args) -> Result<Output> {
    let g = inputs::grammar(&a.grammar, &a.catalogs)?;
    let r = inputs::recognizer(&g)?;
    let vocab = inputs::vocabulary(&a.vocab)?;
    let prefix = inputs::prefix_bytes(&a.prefix_bytes)?;
    let state = r.initial_state().advance_bytes(&prefix);
    if !state.is_viable() {
        return Err(CliError::invalid(
            "non-viable-prefix",
            format!(
                "{:?} is not a prefix of any sentence",
                String::from_utf8_lossy(&prefix)
            ),
        ));
    }
    let mask = compute_mask(&state, &vocab);
    Ok(json!({"allowed": mask.allowed_ids(), "eos": mask.eos_allowed()}).into())
}
