//! Per-token masking overhead, measured in isolation from any scorer.
//!
//! A random admissible walk is drawn first (uniform over allowed tokens,
//! EOS excluded). The walk is then replayed as warmup and replayed again
//! under a monotonic clock, timing `compute_mask` plus `advance_token` for
//! every step.

use std::hint::black_box;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::earley::Recognizer;
use crate::mask::{advance_token, compute_mask, MaskError};
use crate::vocab::{TokenId, Vocabulary};

pub const WARMUP_STEPS: usize = 100;
pub const MIN_STEPS: usize = 100;

#[derive(Debug, Error)]
pub enum OverheadError {
    #[error("at least {MIN_STEPS} steps are required, got {0}")]
    TooFewSteps(usize),
    #[error("initial state admits no token besides EOS")]
    EmptyWalk,
    #[error(transparent)]
    Mask(#[from] MaskError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    pub tokens: Vec<TokenId>,
    /// The language ran out of non-EOS continuations before the requested
    /// length.
    pub truncated: bool,
}

/// Draws up to `steps` tokens uniformly from each step's mask, never EOS.
pub fn random_walk(grammar: &Arc<Recognizer>, vocab: &Vocabulary, steps: usize, seed: u64) -> Walk {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = grammar.initial_state();
    let mut tokens = Vec::with_capacity(steps);
    while tokens.len() < steps {
        let mask = compute_mask(&state, vocab);
        let n = mask.count();
        if n == 0 {
            return Walk {
                tokens,
                truncated: true,
            };
        }
        let pick = rng.random_range(0..n);
        let t = mask.allowed().ones().nth(pick).expect("pick < count") as TokenId;
        state = advance_token(&state, vocab, t).expect("token taken from the mask");
        tokens.push(t);
    }
    Walk {
        tokens,
        truncated: false,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencyReport {
    pub grammar: String,
    pub vocab_size: usize,
    /// Distinct walk steps timed.
    pub steps: usize,
    /// Timed step executions; a short walk is replayed until this reaches
    /// the requested step count.
    pub samples: usize,
    pub warmup: usize,
    pub mean_us: f64,
    pub p50_us: f64,
    pub p95_us: f64,
    pub truncated: bool,
}

/// Times `compute_mask` + `advance_token` over a seeded walk of `steps`
/// tokens.
pub fn measure_overhead(
    name: &str,
    grammar: &Arc<Recognizer>,
    vocab: &Vocabulary,
    steps: usize,
    seed: u64,
) -> Result<LatencyReport, OverheadError> {
    if steps < MIN_STEPS {
        return Err(OverheadError::TooFewSteps(steps));
    }
    let walk = random_walk(grammar, vocab, steps, seed);
    if walk.tokens.is_empty() {
        return Err(OverheadError::EmptyWalk);
    }

    let replay = |samples: &mut Option<&mut Vec<f64>>| -> Result<(), OverheadError> {
        let mut state = grammar.initial_state();
        for &t in &walk.tokens {
            let start = Instant::now();
            let mask = compute_mask(&state, vocab);
            state = advance_token(&state, vocab, t)?;
            let elapsed = start.elapsed();
            black_box(&mask);
            if let Some(out) = samples.as_deref_mut() {
                out.push(elapsed.as_secs_f64() * 1e6);
            }
        }
        Ok(())
    };

    let mut warmed = 0;
    while warmed < WARMUP_STEPS {
        replay(&mut None)?;
        warmed += walk.tokens.len();
    }
    let mut samples = Vec::with_capacity(steps);
    while samples.len() < steps {
        replay(&mut Some(&mut samples))?;
    }
    samples.sort_by(f64::total_cmp);
    let mean_us = samples.iter().sum::<f64>() / samples.len() as f64;
    Ok(LatencyReport {
        grammar: name.to_owned(),
        vocab_size: vocab.len(),
        steps: walk.tokens.len(),
        samples: samples.len(),
        warmup: warmed,
        mean_us,
        p50_us: percentile(&samples, 0.50),
        p95_us: percentile(&samples, 0.95),
        truncated: walk.truncated,
    })
}

/// Nearest-rank percentile of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}
