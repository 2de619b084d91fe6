//! Deterministic scorers used in tests and from the command line.

use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::path::Path;

use rand::rngs::SmallRng;
use rand::{RngCore, SeedableRng};
use rustc_hash::FxHasher;
use thiserror::Error;

use super::Scorer;
use crate::vocab::TokenId;

#[derive(Debug, Error)]
pub enum ScorerError {
    #[error("replay has {rows} rows, step {step} requested")]
    StepOverflow { step: usize, rows: usize },
    #[error("no bigram row for context {0:?}")]
    MissingContext(String),
    #[error("malformed scorer file (line {line}): {message}")]
    Malformed { line: usize, message: String },
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn read(path: &Path) -> Result<String, ScorerError> {
    std::fs::read_to_string(path).map_err(|source| ScorerError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parses a logprob row. `null` stands for negative infinity since JSON has
/// no literal for it.
fn parse_row(v: &serde_json::Value, line: usize) -> Result<Vec<f64>, ScorerError> {
    let bad = |message: String| ScorerError::Malformed { line, message };
    let items = v
        .as_array()
        .ok_or_else(|| bad("row must be an array".into()))?;
    items
        .iter()
        .map(|x| match x {
            serde_json::Value::Null => Ok(f64::NEG_INFINITY),
            serde_json::Value::Number(n) => {
                n.as_f64().ok_or_else(|| bad(format!("bad number {n}")))
            }
            other => Err(bad(format!("expected a number, got {other}"))),
        })
        .collect()
}

/// Every token equally likely.
#[derive(Debug, Clone)]
pub struct UniformScorer {
    n: usize,
}

pub fn uniform_scorer(n: usize) -> UniformScorer {
    UniformScorer { n }
}

impl Scorer for UniformScorer {
    fn next_logprobs(&self, _context: &[TokenId]) -> Result<Vec<f64>, ScorerError> {
        Ok(vec![-(self.n as f64).ln(); self.n])
    }
}

/// Row `i` answers the query at step `i` (context of length `i`).
#[derive(Debug, Clone)]
pub struct ReplayScorer {
    rows: Vec<Vec<f64>>,
}

impl ReplayScorer {
    pub fn new(rows: Vec<Vec<f64>>) -> Self {
        ReplayScorer { rows }
    }

    /// JSON lines, one dense array per step. Blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self, ScorerError> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let v: serde_json::Value =
                serde_json::from_str(line).map_err(|e| ScorerError::Malformed {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            rows.push(parse_row(&v, i + 1)?);
        }
        Ok(ReplayScorer { rows })
    }
}

pub fn replay_scorer(path: impl AsRef<Path>) -> Result<ReplayScorer, ScorerError> {
    ReplayScorer::parse(&read(path.as_ref())?)
}

impl Scorer for ReplayScorer {
    fn next_logprobs(&self, context: &[TokenId]) -> Result<Vec<f64>, ScorerError> {
        self.rows
            .get(context.len())
            .cloned()
            .ok_or(ScorerError::StepOverflow {
                step: context.len(),
                rows: self.rows.len(),
            })
    }

    fn is_reentrant(&self) -> bool {
        false
    }
}

/// Conditions on the previous token only; `None` is the start of output.
#[derive(Debug, Clone, Default)]
pub struct BigramScorer {
    rows: HashMap<Option<TokenId>, Vec<f64>>,
}

impl BigramScorer {
    pub fn new(rows: HashMap<Option<TokenId>, Vec<f64>>) -> Self {
        BigramScorer { rows }
    }

    /// `{"": [...], "0": [...], ...}`: keys are previous token ids, `""` is
    /// the start.
    pub fn parse(text: &str) -> Result<Self, ScorerError> {
        let bad = |message: String| ScorerError::Malformed { line: 1, message };
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        let map = v
            .as_object()
            .ok_or_else(|| bad("bigram table must be an object".into()))?;
        let mut rows = HashMap::new();
        for (k, row) in map {
            let key = if k.is_empty() {
                None
            } else {
                Some(
                    k.parse::<TokenId>()
                        .map_err(|_| bad(format!("bad context key {k:?}")))?,
                )
            };
            rows.insert(key, parse_row(row, 1)?);
        }
        Ok(BigramScorer { rows })
    }
}

pub fn ngram_scorer(path: impl AsRef<Path>) -> Result<BigramScorer, ScorerError> {
    BigramScorer::parse(&read(path.as_ref())?)
}

impl Scorer for BigramScorer {
    fn next_logprobs(&self, context: &[TokenId]) -> Result<Vec<f64>, ScorerError> {
        let key = context.last().copied();
        self.rows.get(&key).cloned().ok_or_else(|| {
            ScorerError::MissingContext(key.map(|k| k.to_string()).unwrap_or_default())
        })
    }
}

/// Pseudo-random but deterministic distributions: the row for a context is
/// a log-softmax of logits drawn from a generator seeded by `(seed,
/// context)`. Logits take one of 256 evenly spaced levels in `[0, spread]`.
#[derive(Debug, Clone)]
pub struct RandomScorer {
    n: usize,
    seed: u64,
    levels: [f64; 256],
}

impl RandomScorer {
    pub fn new(n: usize, seed: u64) -> Self {
        Self::with_spread(n, seed, 8.0)
    }

    pub fn with_spread(n: usize, seed: u64, spread: f64) -> Self {
        let mut levels = [0.0; 256];
        for (i, l) in levels.iter_mut().enumerate() {
            *l = spread * i as f64 / 255.0;
        }
        RandomScorer { n, seed, levels }
    }
}

impl Scorer for RandomScorer {
    fn next_logprobs(&self, context: &[TokenId]) -> Result<Vec<f64>, ScorerError> {
        let mut h = FxHasher::default();
        self.seed.hash(&mut h);
        context.hash(&mut h);
        let mut rng = SmallRng::seed_from_u64(h.finish());
        let mut draws = vec![0u8; self.n];
        rng.fill_bytes(&mut draws);
        let mut counts = [0usize; 256];
        for &d in &draws {
            counts[d as usize] += 1;
        }
        let max = self.levels[255];
        let total: f64 = counts
            .iter()
            .zip(&self.levels)
            .map(|(&c, &l)| c as f64 * (l - max).exp())
            .sum();
        let lse = max + total.ln();
        Ok(draws
            .into_iter()
            .map(|d| self.levels[d as usize] - lse)
            .collect())
    }
}
