//! Fixtures shared by the mask benchmarks: synthetic task grammars at
//! controlled sizes, a 32k-token vocabulary, and precomputed walk states.

use std::hint::black_box;
use std::sync::Arc;
use std::time::Instant;

use gcdkit::overhead::random_walk;
use gcdkit::synth::{bpe_like_vocab, entity_names, relation_names, sentence};
use gcdkit::templates::{
    build_cie_grammar, build_cp_grammar, build_ed_grammar, CieSchema, CpInstance, EdInstance,
    EdMode,
};
use gcdkit::{advance_token, Catalog, Grammar, ParserState, Recognizer, Vocabulary};

pub const VOCAB_SIZE: usize = 32_000;
pub const RELATIONS: usize = 500;
pub const CATALOG_SIZES: [usize; 3] = [1_000, 10_000, 100_000];

pub fn vocab() -> Vocabulary {
    bpe_like_vocab(VOCAB_SIZE, 0)
}

pub fn cie_grammar(entities: usize, seed: u64) -> Grammar {
    let ents = Catalog::new("entities", entity_names(entities, seed)).expect("names are non-empty");
    let rels =
        Catalog::new("relations", relation_names(RELATIONS, seed)).expect("names are non-empty");
    let schema = CieSchema::new(Arc::new(ents), Arc::new(rels)).expect("default markers fit");
    build_cie_grammar(&schema)
}

pub fn ed_grammar(candidates: usize, seed: u64) -> Grammar {
    let inst = EdInstance::new(
        "Shares of the company rose after ",
        "Koukel",
        entity_names(candidates, seed)
            .into_iter()
            .map(String::into_bytes)
            .collect(),
    );
    build_ed_grammar(&inst, &EdMode::InputDependent).expect("instance has candidates")
}

pub fn cp_grammar(words: usize, seed: u64) -> Grammar {
    let words = sentence(words, seed)
        .into_iter()
        .map(String::into_bytes)
        .collect();
    let inst = CpInstance::new(words, gcdkit::templates::penn_labels()).expect("valid instance");
    build_cp_grammar(&inst).expect("valid instance")
}

pub fn compile(g: &Grammar) -> Arc<Recognizer> {
    Recognizer::compile(g).expect("fixture grammars compile")
}

/// The parser states visited by a seeded random walk, starting with the
/// initial state.
pub fn walk_states(
    grammar: &Arc<Recognizer>,
    vocab: &Vocabulary,
    steps: usize,
    seed: u64,
) -> Vec<ParserState> {
    let walk = random_walk(grammar, vocab, steps, seed);
    let mut state = grammar.initial_state();
    let mut out = vec![state.clone()];
    for &t in &walk.tokens {
        state = advance_token(&state, vocab, t).expect("walk tokens are admissible");
        out.push(state.clone());
    }
    out
}

#[inline(never)]
fn noop() {}

/// Mean microseconds the timing loop of the overhead harness reports for
/// an empty function.
pub fn empty_baseline_us(samples: usize) -> f64 {
    let mut total = 0.0;
    for _ in 0..samples {
        let start = Instant::now();
        black_box(noop)();
        total += start.elapsed().as_secs_f64() * 1e6;
    }
    total / samples as f64
}
