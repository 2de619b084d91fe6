use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::ValueEnum;
use gcdkit::metrics::{
    bracketing_prf, check_validity, cie_prf, ed_accuracy, parse_bracket_tree, parse_triplets,
    BracketOptions, Prf, TripletSet,
};
use gcdkit::templates::{penn_labels, CieMarkers};
use serde_json::{json, Value};

use crate::error::{CliError, Result};
use crate::{inputs, Output};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalTask {
    Cie,
    Ed,
    Cp,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, value_enum)]
    task: EvalTask,
    /// Predictions, one JSON string per line.
    #[arg(long)]
    pred: PathBuf,
    /// Gold outputs, one JSON string per line.
    #[arg(long)]
    gold: PathBuf,
    /// cp: also check each prediction is a well-formed parse of the gold
    /// words; any invalid prediction sets exit status 1.
    #[arg(long)]
    validity: bool,
    /// cp: allowed labels, one per line (Penn Treebank labels by default).
    #[arg(long)]
    labels: Option<PathBuf>,
    /// cp: ignore spans of nodes over exactly one word.
    #[arg(long)]
    exclude_preterminals: bool,
    /// cp: compare labels without function tags (NP-SBJ as NP).
    #[arg(long)]
    strip_function_tags: bool,
}

fn prf_json(p: &Prf) -> Value {
    json!({"p": p.precision, "r": p.recall, "f1": p.f1})
}

pub fn run(a: Args) -> Result<Output> {
    let pred = inputs::read_jsonl_strings(&a.pred)?;
    let gold = inputs::read_jsonl_strings(&a.gold)?;
    if pred.len() != gold.len() {
        return Err(CliError::format(
            "length-mismatch",
            format!("{} predictions for {} gold lines", pred.len(), gold.len()),
        ));
    }
    if a.validity && a.task != EvalTask::Cp {
        return Err(CliError::format(
            "usage",
            "--validity applies to --task cp only",
        ));
    }
    match a.task {
        EvalTask::Cie => cie(&pred, &gold),
        EvalTask::Ed => {
            let acc = ed_accuracy(&pred, &gold).map_err(|e| CliError::format("eval", e))?;
            Ok(json!({"accuracy": acc, "n": gold.len()}).into())
        }
        EvalTask::Cp => cp(&a, &pred, &gold),
    }
}

fn cie(pred: &[String], gold: &[String]) -> Result<Output> {
    let markers = CieMarkers::default();
    let mut gold_sets = Vec::with_capacity(gold.len());
    for (i, g) in gold.iter().enumerate() {
        let set = parse_triplets(g.as_bytes(), &markers)
            .map_err(|e| CliError::format("gold", format!("line {}: {e}", i + 1)))?;
        gold_sets.push(set);
    }
    let pred_sets: Vec<TripletSet> = pred
        .iter()
        .enumerate()
        .map(|(i, p)| {
            parse_triplets(p.as_bytes(), &markers).unwrap_or_else(|e| {
                log::warn!("prediction {}: {e}; scored as no triplets", i + 1);
                TripletSet::new()
            })
        })
        .collect();
    let prf = cie_prf(&pred_sets, &gold_sets).map_err(|e| CliError::format("eval", e))?;
    Ok(prf_json(&prf).into())
}

fn cp(a: &Args, pred: &[String], gold: &[String]) -> Result<Output> {
    let opts = BracketOptions {
        exclude_preterminals: a.exclude_preterminals,
        strip_function_tags: a.strip_function_tags,
    };
    let labels: Vec<Vec<u8>> = match &a.labels {
        Some(p) => inputs::catalog(p)?.entries().to_vec(),
        None => penn_labels(),
    };
    let (mut matched, mut pred_spans, mut gold_spans) = (0, 0, 0);
    let (mut unparsable, mut leaf_mismatches, mut valid) = (0, 0, 0);
    let mut failures: BTreeMap<String, usize> = BTreeMap::new();
    for (i, (p, g)) in pred.iter().zip(gold).enumerate() {
        let gt = parse_bracket_tree(g.as_bytes())
            .map_err(|e| CliError::format("gold", format!("line {}: {e}", i + 1)))?;
        match parse_bracket_tree(p.as_bytes()) {
            Ok(pt) => {
                let s = bracketing_prf(&pt, &gt, &opts);
                matched += s.matched;
                pred_spans += s.pred_spans;
                gold_spans += s.gold_spans;
                leaf_mismatches += usize::from(s.leaf_mismatch);
            }
            Err(_) => {
                unparsable += 1;
                gold_spans += gt.spans(&opts).len();
            }
        }
        if a.validity {
            let v = check_validity(p.as_bytes(), &gt.leaves(), &labels);
            valid += usize::from(v.valid);
            for f in v.failures {
                let key = serde_json::to_value(f).expect("failure kinds serialize");
                *failures
                    .entry(key.as_str().unwrap_or_default().to_owned())
                    .or_default() += 1;
            }
        }
    }
    let mut doc = prf_json(&Prf::from_counts(matched, pred_spans, gold_spans));
    let obj = doc.as_object_mut().expect("object");
    obj.insert("matched".into(), json!(matched));
    obj.insert("pred_spans".into(), json!(pred_spans));
    obj.insert("gold_spans".into(), json!(gold_spans));
    obj.insert("sentences".into(), json!(gold.len()));
    obj.insert("unparsable".into(), json!(unparsable));
    obj.insert("leaf_mismatches".into(), json!(leaf_mismatches));
    let mut failure = None;
    if a.validity {
        let rate = if gold.is_empty() {
            1.0
        } else {
            valid as f64 / gold.len() as f64
        };
        obj.insert(
            "validity".into(),
            json!({"valid": valid, "total": gold.len(), "rate": rate, "failures": failures}),
        );
        if valid < gold.len() {
            failure = Some(CliError::invalid(
                "invalid-parse",
                format!(
                    "{} of {} predictions are not valid parses",
                    gold.len() - valid,
                    gold.len()
                ),
            ));
        }
    }
    Ok(Output { doc, failure })
}
