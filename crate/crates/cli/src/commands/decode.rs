use gcdkit::decoder::{
    beam_search, ngram_scorer, replay_scorer, select_nonempty, uniform_scorer, RandomScorer,
    ScorerError,
};
use gcdkit::mask::capacity_from_env;
use gcdkit::metrics::{check_validity, parse_triplets};
use gcdkit::{
    empty_string_report, length_normalized_score, DecodeConfig, DecodeError, Scorer, Vocabulary,
};
use serde_json::{json, Map, Value};

use super::{task_grammar, TaskArgs, TaskGrammar};
use crate::error::{CliError, Result};
use crate::{inputs, Output};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[command(flatten)]
    task: TaskArgs,
    /// Vocabulary JSON, or synth:SIZE[:SEED].
    #[arg(long)]
    vocab: String,
    /// uniform, replay:PATH, bigram:PATH or random:SEED.
    #[arg(long, default_value = "uniform")]
    scorer: String,
    #[arg(long, default_value_t = 2)]
    beam: usize,
    /// Length-normalization exponent.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Keep a pure-EOS hypothesis at rank 1 if it scores best.
    #[arg(long)]
    allow_empty: bool,
    #[arg(long, default_value_t = 256)]
    max_tokens: usize,
    /// Score with the distribution renormalized over allowed tokens.
    #[arg(long)]
    renormalize: bool,
}

fn scorer(source: &str, vocab: &Vocabulary) -> Result<Box<dyn Scorer>> {
    let scorer_error = |e: ScorerError| match e {
        ScorerError::Io { path, source } => CliError::io(std::path::Path::new(&path), source),
        other => CliError::format("scorer", other),
    };
    let (kind, arg) = source.split_once(':').unwrap_or((source, ""));
    Ok(match (kind, arg) {
        ("uniform", "") => Box::new(uniform_scorer(vocab.len())),
        ("replay", p) if !p.is_empty() => Box::new(replay_scorer(p).map_err(scorer_error)?),
        ("bigram", p) if !p.is_empty() => Box::new(ngram_scorer(p).map_err(scorer_error)?),
        ("random", seed) => {
            let seed = seed
                .parse()
                .map_err(|_| CliError::format("scorer", format!("bad random seed {seed:?}")))?;
            Box::new(RandomScorer::new(vocab.len(), seed))
        }
        _ => {
            return Err(CliError::format(
                "scorer",
                format!("unknown scorer {source:?}"),
            ))
        }
    })
}

fn decode_error(e: DecodeError) -> CliError {
    match e {
        DecodeError::NonViable | DecodeError::DeadEnd { .. } => CliError::invalid("decode", e),
        DecodeError::Scorer(ScorerError::Io { path, source }) => {
            CliError::io(std::path::Path::new(&path), source)
        }
        other => CliError::format("decode", other),
    }
}

fn lossy(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

/// What the best output means for its task.
fn interpret(tg: &TaskGrammar, best: &[u8]) -> Map<String, Value> {
    let mut out = Map::new();
    match tg {
        TaskGrammar::Cie(_, schema) => {
            let triplets = parse_triplets(best, &schema.markers).map_or(Value::Null, |set| {
                set.iter()
                    .map(|t| json!([lossy(&t.subject), lossy(&t.relation), lossy(&t.object)]))
                    .collect()
            });
            out.insert("triplets".into(), triplets);
        }
        TaskGrammar::Ed(_, inst) => {
            let entity = inst.extract_entity(best).map(lossy);
            out.insert("entity".into(), json!(entity));
        }
        TaskGrammar::Cp(_, inst) => {
            let v = check_validity(best, &inst.words, &inst.labels);
            out.insert("validity".into(), json!(v));
        }
        TaskGrammar::Raw(_) => {}
    }
    out
}

pub fn run(a: Args) -> Result<Output> {
    let tg = task_grammar(&a.task)?;
    let recognizer = inputs::recognizer(tg.grammar())?;
    let vocab = inputs::vocabulary(&a.vocab)?;
    let scorer = scorer(&a.scorer, &vocab)?;
    let config = DecodeConfig {
        beam_size: a.beam,
        max_tokens: a.max_tokens,
        alpha: a.alpha,
        select_nonempty: !a.allow_empty,
        renormalize: a.renormalize,
        cache_capacity: capacity_from_env(DecodeConfig::default().cache_capacity),
    };
    let mut ranked =
        beam_search(scorer.as_ref(), &recognizer, &vocab, &config).map_err(decode_error)?;
    let report = empty_string_report(&ranked, vocab.eos());
    if config.select_nonempty {
        select_nonempty(&mut ranked, vocab.eos());
    }
    let hypotheses: Vec<Value> = ranked
        .iter()
        .map(|h| {
            json!({
                "ids": h.ids,
                "text": h.text(&vocab),
                "logprob_sum": h.logprob_sum,
                "score": length_normalized_score(h, config.alpha),
                "tokens": h.len(),
                "finished": h.finished,
            })
        })
        .collect();
    let best = ranked[0].bytes(&vocab);
    let mut doc = Map::new();
    doc.insert("best".into(), json!(ranked[0].text(&vocab)));
    doc.extend(interpret(&tg, &best));
    doc.insert("hypotheses".into(), hypotheses.into());
    doc.insert("empty_string_report".into(), json!(report));
    Ok(Value::Object(doc).into())
}
