use gcdkit::overhead::measure_overhead;
use gcdkit::parse_grammar;
use gcdkit::Vocabulary;
use gcdkit_bench::{compile, empty_baseline_us};

// Two Earley-set allocations per step already cost several times the
// timer floor on slow allocators; run with --ignored on the target machine.
#[test]
#[ignore]
fn trivial_grammar_is_near_the_timing_floor() {
    let g = compile(&parse_grammar("S ::= \"a\";").unwrap());
    let v = Vocabulary::from_json(r#"{"eos":5,"tokens":["a","b","c","ab","bc",""]}"#).unwrap();
    let baseline = empty_baseline_us(10_000);
    let report = measure_overhead("a", &g, &v, 10_000, 0).unwrap();
    eprintln!(
        "baseline {baseline:.4} us, trivial {:.4} us",
        report.mean_us
    );
    assert!(report.truncated);
    assert!(
        report.mean_us < 10.0 * baseline,
        "{} vs {baseline}",
        report.mean_us
    );
}
