use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gcdkit::{advance_token, compute_mask, ParserState, Vocabulary};
use gcdkit_bench::{
    cie_grammar, compile, cp_grammar, ed_grammar, vocab, walk_states, CATALOG_SIZES,
};

const WALK: usize = 200;

fn cycle_masks(
    c: &mut Criterion,
    group: &str,
    id: BenchmarkId,
    states: &[ParserState],
    v: &Vocabulary,
) {
    let mut g = c.benchmark_group(group);
    g.sample_size(20)
        .warm_up_time(Duration::from_millis(500))
        .measurement_time(Duration::from_secs(3));
    g.bench_function(id, |b| {
        let mut i = 0;
        b.iter(|| {
            i = (i + 1) % states.len();
            compute_mask(&states[i], v)
        })
    });
    g.finish();
}

fn cie(c: &mut Criterion) {
    let v = vocab();
    for n in CATALOG_SIZES {
        let r = compile(&cie_grammar(n, 0));
        let states = walk_states(&r, &v, WALK, 1);
        cycle_masks(c, "mask/cie", BenchmarkId::from_parameter(n), &states, &v);
    }
}

fn ed(c: &mut Criterion) {
    let v = vocab();
    let r = compile(&ed_grammar(30, 0));
    let states = walk_states(&r, &v, WALK, 1);
    cycle_masks(c, "mask/ed", BenchmarkId::from_parameter(30), &states, &v);
}

fn cp(c: &mut Criterion) {
    let v = vocab();
    let r = compile(&cp_grammar(20, 0));
    let states = walk_states(&r, &v, WALK, 1);
    cycle_masks(c, "mask/cp", BenchmarkId::from_parameter(20), &states, &v);
}

fn advance(c: &mut Criterion) {
    let v = vocab();
    let r = compile(&cie_grammar(10_000, 0));
    let walk = gcdkit::overhead::random_walk(&r, &v, WALK, 1);
    let states = walk_states(&r, &v, WALK, 1);
    let mut g = c.benchmark_group("advance_token");
    g.sample_size(20)
        .warm_up_time(Duration::from_millis(500))
        .measurement_time(Duration::from_secs(3));
    g.bench_function("cie/10000", |b| {
        let mut i = 0;
        b.iter(|| {
            i = (i + 1) % walk.tokens.len();
            advance_token(&states[i], &v, walk.tokens[i]).expect("walk token")
        })
    });
    g.finish();
}

criterion_group!(benches, cie, ed, cp, advance);
criterion_main!(benches);
