//! Synthetic fixtures: pronounceable entity names and a subword vocabulary
//! shaped like a byte-pair encoder's, for tests and benchmarks that need
//! realistic sizes without shipping real model files.

use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::vocab::{TokenId, Vocabulary};

const ONSETS: &[&str] = &[
    "b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "z", "br",
    "ch", "dr", "gr", "kr", "sh", "st", "th", "tr",
];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ai", "ou"];
const CODAS: &[&str] = &["", "n", "r", "s", "l", "m", "k"];

/// Every onset-vowel-coda combination, in a fixed order.
pub fn syllables() -> Vec<String> {
    let mut out = Vec::new();
    for o in ONSETS {
        for v in VOWELS {
            for c in CODAS {
                out.push(format!("{o}{v}{c}"));
            }
        }
    }
    out
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_ascii_uppercase().to_string() + c.as_str(),
        None => String::new(),
    }
}

fn word(rng: &mut ChaCha8Rng, syl: &[String], max_syllables: usize) -> String {
    let n = rng.random_range(1..=max_syllables);
    (0..n).map(|_| syl.choose(rng).unwrap().as_str()).collect()
}

/// `n` distinct names of one to three capitalized words, e.g. `Drama Koukel`.
pub fn entity_names(n: usize, seed: u64) -> Vec<String> {
    let syl = syllables();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let words = rng.random_range(1..=3);
        let name = (0..words)
            .map(|_| capitalize(&word(&mut rng, &syl, 3)))
            .collect::<Vec<_>>()
            .join(" ");
        if seen.insert(name.clone()) {
            out.push(name);
        }
    }
    out
}

/// `n` distinct lowercase relation names of one or two words.
pub fn relation_names(n: usize, seed: u64) -> Vec<String> {
    let syl = syllables();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut seen = HashSet::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let words = rng.random_range(1..=2);
        let name = (0..words)
            .map(|_| word(&mut rng, &syl, 2))
            .collect::<Vec<_>>()
            .join(" ");
        if seen.insert(name.clone()) {
            out.push(name);
        }
    }
    out
}

/// `n` lowercase words without whitespace or brackets; repeats allowed.
pub fn sentence(n: usize, seed: u64) -> Vec<String> {
    let syl = syllables();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5e47);
    (0..n).map(|_| word(&mut rng, &syl, 3)).collect()
}

/// A vocabulary of exactly `size` tokens (`size >= 128`): every printable
/// ASCII byte plus newline and tab, syllables and their capitalized and
/// space-prefixed forms, a few bracket combinations, then random
/// two-syllable merges. EOS is the last id.
pub fn bpe_like_vocab(size: usize, seed: u64) -> Vocabulary {
    assert!(size >= 128, "vocabulary too small");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let mut tokens: Vec<Vec<u8>> = Vec::with_capacity(size);
    let limit = size - 1;
    let mut push = |t: Vec<u8>, tokens: &mut Vec<Vec<u8>>| {
        if tokens.len() < limit && seen.insert(t.clone()) {
            tokens.push(t);
        }
    };
    for b in (0x20u8..0x7f).chain(*b"\n\t") {
        push(vec![b], &mut tokens);
    }
    for t in [
        " [", "[", "]", "]]", " ]", "][", "[[", " [[", "<", ">", "</", " <", "s]", "r]", "o]",
    ] {
        push(t.as_bytes().to_vec(), &mut tokens);
    }
    let syl = syllables();
    for s in &syl {
        push(s.as_bytes().to_vec(), &mut tokens);
        push(capitalize(s).into_bytes(), &mut tokens);
        push(format!(" {s}").into_bytes(), &mut tokens);
        push(format!(" {}", capitalize(s)).into_bytes(), &mut tokens);
    }
    while tokens.len() < limit {
        let a = syl.choose(&mut rng).unwrap();
        let b = syl.choose(&mut rng).unwrap();
        let t = match rng.random_range(0..4) {
            0 => format!("{a}{b}"),
            1 => format!(" {a}{b}"),
            2 => capitalize(&format!("{a}{b}")),
            _ => format!(" {}", capitalize(&format!("{a}{b}"))),
        };
        push(t.into_bytes(), &mut tokens);
    }
    let eos = tokens.len() as TokenId;
    tokens.push(Vec::new());
    Vocabulary::new(tokens, eos).expect("synthetic vocabulary is well formed")
}
