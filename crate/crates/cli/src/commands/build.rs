use serde_json::{json, Map, Value};

use super::{task_grammar, TaskArgs};
use crate::error::Result;
use crate::Output;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[command(flatten)]
    task: TaskArgs,
}

pub fn run(a: Args) -> Result<Output> {
    let tg = task_grammar(&a.task)?;
    let g = tg.grammar();
    let catalogs: Map<String, Value> = g
        .catalogs()
        .iter()
        .map(|(name, c)| (name.clone(), json!(c.len())))
        .collect();
    Ok(json!({
        "grammar": g.to_dsl(),
        "start": g.name(g.start()),
        "rules": g.rules().len(),
        "nonterminals": g.nonterminal_count(),
        "catalogs": catalogs,
    })
    .into())
}
