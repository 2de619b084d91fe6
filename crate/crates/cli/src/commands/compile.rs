use std::path::PathBuf;

use gcdkit::{validate, Recognizer};
use serde_json::{json, Map, Value};

use crate::error::{CliError, Result};
use crate::{inputs, Output};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    grammar: PathBuf,
    /// Lexset binding NAME=PATH; repeatable.
    #[arg(long = "catalog", value_parser = inputs::parse_binding)]
    catalogs: Vec<(String, PathBuf)>,
    /// Only validate; skip building the recognizer.
    #[arg(long)]
    check: bool,
}

pub fn run(a: Args) -> Result<Output> {
    let g = inputs::grammar(&a.grammar, &a.catalogs)?;
    let diags = validate(&g);
    let clean = diags.is_empty();
    let mut doc = Map::new();
    doc.insert("clean".into(), json!(clean));
    doc.insert(
        "diagnostics".into(),
        Value::Array(diags.iter().map(inputs::diagnostic_json).collect()),
    );
    if !clean {
        let failure =
            CliError::invalid("grammar-invalid", format!("{} diagnostic(s)", diags.len()));
        return Ok(Output {
            doc: doc.into(),
            failure: Some(failure),
        });
    }
    if !a.check {
        let r = Recognizer::compile(&g).map_err(|e| CliError::invalid("compile", e))?;
        doc.insert("start".into(), json!(g.name(g.start())));
        doc.insert("nonterminals".into(), json!(g.nonterminal_count()));
        doc.insert("rules".into(), json!(r.rule_count()));
        let lexsets: Map<String, Value> = g
            .catalogs()
            .iter()
            .map(|(name, c)| (name.clone(), json!(c.len())))
            .collect();
        doc.insert("catalogs".into(), lexsets.into());
    }
    Ok(Value::Object(doc).into())
}
