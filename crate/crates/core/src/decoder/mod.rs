//! Constrained greedy and beam search over an abstract [`Scorer`].
//!
//! Each step the scorer's row is restricted to the tokens allowed by
//! [`compute_mask`](crate::mask::compute_mask); EOS is eligible only where the
//! output is a complete sentence. Step scores are the raw log-probabilities
//! unless [`DecodeConfig::renormalize`] is set.

mod scorers;

use std::sync::Arc;

use thiserror::Error;

pub use scorers::{
    ngram_scorer, replay_scorer, uniform_scorer, BigramScorer, RandomScorer, ReplayScorer,
    ScorerError, UniformScorer,
};

use crate::earley::{ParserState, Recognizer};
use crate::mask::{advance_token, MaskCache, MaskError, TokenMask};
use crate::vocab::{TokenId, Vocabulary};

/// A next-token distribution over the whole vocabulary.
pub trait Scorer {
    /// Log-probabilities for every token id given the tokens emitted so far.
    /// Values must be finite or negative infinity.
    fn next_logprobs(&self, context: &[TokenId]) -> Result<Vec<f64>, ScorerError>;

    /// Whether concurrent sessions may share this scorer.
    fn is_reentrant(&self) -> bool {
        true
    }
}

impl<S: Scorer + ?Sized> Scorer for &S {
    fn next_logprobs(&self, context: &[TokenId]) -> Result<Vec<f64>, ScorerError> {
        (**self).next_logprobs(context)
    }

    fn is_reentrant(&self) -> bool {
        (**self).is_reentrant()
    }
}

impl<S: Scorer + ?Sized> Scorer for Box<S> {
    fn next_logprobs(&self, context: &[TokenId]) -> Result<Vec<f64>, ScorerError> {
        (**self).next_logprobs(context)
    }

    fn is_reentrant(&self) -> bool {
        (**self).is_reentrant()
    }
}

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("invalid decode config: {0}")]
    Config(&'static str),
    #[error("initial parser state is not viable")]
    NonViable,
    #[error("no admissible token and EOS not allowed at step {step}")]
    DeadEnd { step: usize },
    #[error("scorer returned {got} logprobs for a vocabulary of {expected}")]
    RowLength { expected: usize, got: usize },
    #[error("scorer returned {value} for token {token} at step {step}")]
    BadLogprob {
        step: usize,
        token: TokenId,
        value: f64,
    },
    #[error(transparent)]
    Scorer(#[from] ScorerError),
    #[error(transparent)]
    Mask(#[from] MaskError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeConfig {
    pub beam_size: usize,
    pub max_tokens: usize,
    pub alpha: f64,
    pub select_nonempty: bool,
    /// Score steps with the distribution renormalized over allowed tokens.
    pub renormalize: bool,
    /// Mask cache entries per session; 0 disables caching.
    pub cache_capacity: usize,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            beam_size: 2,
            max_tokens: 256,
            alpha: 1.0,
            select_nonempty: true,
            renormalize: false,
            cache_capacity: 4096,
        }
    }
}

impl DecodeConfig {
    fn check(&self) -> Result<(), DecodeError> {
        if self.beam_size == 0 {
            return Err(DecodeError::Config("beam_size must be at least 1"));
        }
        if self.max_tokens == 0 {
            return Err(DecodeError::Config("max_tokens must be at least 1"));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(DecodeError::Config("alpha must be finite and non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Hypothesis {
    /// Emitted ids, ending in EOS when finished.
    pub ids: Vec<TokenId>,
    /// Sum of step log-probabilities (S).
    pub logprob_sum: f64,
    pub state: ParserState,
    pub finished: bool,
}

impl Hypothesis {
    /// Token count m, including EOS.
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Whether this is the empty sentence: nothing but EOS.
    pub fn is_pure_eos(&self, eos: TokenId) -> bool {
        self.ids == [eos]
    }

    /// Hit `max_tokens` without emitting EOS.
    pub fn is_truncated(&self) -> bool {
        !self.finished
    }

    pub fn bytes(&self, vocab: &Vocabulary) -> Vec<u8> {
        vocab
            .detokenize(&self.ids)
            .expect("ids come from the vocabulary")
    }

    pub fn text(&self, vocab: &Vocabulary) -> String {
        String::from_utf8_lossy(&self.bytes(vocab)).into_owned()
    }
}

/// `S / m^alpha`. An empty hypothesis scores `S`.
pub fn length_normalized_score(h: &Hypothesis, alpha: f64) -> f64 {
    normalized(h.logprob_sum, h.len(), alpha)
}

fn normalized(s: f64, m: usize, alpha: f64) -> f64 {
    if m == 0 {
        s
    } else {
        s / (m as f64).powf(alpha)
    }
}

/// `(token, probability)` for every admissible token, renormalized over the
/// admissible set. EOS appears iff the mask allows it.
pub fn masked_distribution(row: &[f64], mask: &TokenMask, eos: TokenId) -> Vec<(TokenId, f64)> {
    let ids = allowed(mask, eos);
    let lse = log_sum_exp(ids.iter().map(|&t| row[t as usize]));
    ids.into_iter()
        .map(|t| {
            let p = if lse == f64::NEG_INFINITY {
                0.0
            } else {
                (row[t as usize] - lse).exp()
            };
            (t, p)
        })
        .collect()
}

fn allowed(mask: &TokenMask, eos: TokenId) -> Vec<TokenId> {
    let mut ids = mask.allowed_ids();
    if mask.eos_allowed() {
        let at = ids.partition_point(|&t| t < eos);
        ids.insert(at, eos);
    }
    ids
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.map(|x| (x - max).exp()).sum::<f64>().ln()
}

struct Session<'a, S: ?Sized> {
    scorer: &'a S,
    vocab: &'a Vocabulary,
    cache: MaskCache,
    config: &'a DecodeConfig,
}

impl<S: Scorer + ?Sized> Session<'_, S> {
    /// Admissible `(token, step score)` pairs in token-id order.
    fn candidates(&self, h: &Hypothesis) -> Result<Vec<(TokenId, f64)>, DecodeError> {
        let step = h.ids.len();
        let row = self.scorer.next_logprobs(&h.ids)?;
        if row.len() != self.vocab.len() {
            return Err(DecodeError::RowLength {
                expected: self.vocab.len(),
                got: row.len(),
            });
        }
        if let Some((token, &value)) = row
            .iter()
            .enumerate()
            .find(|(_, x)| x.is_nan() || **x == f64::INFINITY)
        {
            return Err(DecodeError::BadLogprob {
                step,
                token: token as TokenId,
                value,
            });
        }
        let mask = self.cache.get_or_compute(&h.state, self.vocab);
        let ids = allowed(&mask, self.vocab.eos());
        if ids.is_empty() {
            return Err(DecodeError::DeadEnd { step });
        }
        let offset = if self.config.renormalize {
            let lse = log_sum_exp(ids.iter().map(|&t| row[t as usize]));
            if lse.is_finite() {
                lse
            } else {
                0.0
            }
        } else {
            0.0
        };
        Ok(ids
            .into_iter()
            .map(|t| (t, row[t as usize] - offset))
            .collect())
    }

    fn extend(
        &self,
        h: &Hypothesis,
        token: TokenId,
        score: f64,
    ) -> Result<Hypothesis, DecodeError> {
        let state = advance_token(&h.state, self.vocab, token)?;
        let mut ids = h.ids.clone();
        ids.push(token);
        Ok(Hypothesis {
            ids,
            logprob_sum: h.logprob_sum + score,
            state,
            finished: token == self.vocab.eos(),
        })
    }
}

fn start<'a, S: Scorer + ?Sized>(
    scorer: &'a S,
    grammar: &Arc<Recognizer>,
    vocab: &'a Vocabulary,
    config: &'a DecodeConfig,
) -> Result<(Session<'a, S>, Hypothesis), DecodeError> {
    config.check()?;
    let state = grammar.initial_state();
    if !state.is_viable() {
        return Err(DecodeError::NonViable);
    }
    let session = Session {
        scorer,
        vocab,
        cache: MaskCache::new(config.cache_capacity),
        config,
    };
    let root = Hypothesis {
        ids: Vec::new(),
        logprob_sum: 0.0,
        state,
        finished: false,
    };
    Ok((session, root))
}

/// Argmax decoding; ties go to the lowest token id.
pub fn constrained_greedy<S: Scorer + ?Sized>(
    scorer: &S,
    grammar: &Arc<Recognizer>,
    vocab: &Vocabulary,
    config: &DecodeConfig,
) -> Result<Hypothesis, DecodeError> {
    let (session, mut h) = start(scorer, grammar, vocab, config)?;
    while !h.finished && h.ids.len() < config.max_tokens {
        let mut best: Option<(TokenId, f64)> = None;
        for (t, s) in session.candidates(&h)? {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((t, s));
            }
        }
        let (t, s) = best.expect("candidates are non-empty");
        h = session.extend(&h, t, s)?;
    }
    Ok(h)
}

/// Beam search returning every finished hypothesis ranked by
/// [`length_normalized_score`], with [`DecodeConfig::select_nonempty`]
/// applied. If none finished, the single best truncated hypothesis is
/// returned.
pub fn constrained_beam<S: Scorer + ?Sized>(
    scorer: &S,
    grammar: &Arc<Recognizer>,
    vocab: &Vocabulary,
    config: &DecodeConfig,
) -> Result<Vec<Hypothesis>, DecodeError> {
    let mut ranked = beam_search(scorer, grammar, vocab, config)?;
    if config.select_nonempty {
        select_nonempty(&mut ranked, vocab.eos());
    }
    Ok(ranked)
}

/// [`constrained_beam`] without the non-empty selection: the pure ranking.
pub fn beam_search<S: Scorer + ?Sized>(
    scorer: &S,
    grammar: &Arc<Recognizer>,
    vocab: &Vocabulary,
    config: &DecodeConfig,
) -> Result<Vec<Hypothesis>, DecodeError> {
    let (session, root) = start(scorer, grammar, vocab, config)?;
    let k = config.beam_size;
    let mut active = vec![root];
    let mut finished: Vec<Hypothesis> = Vec::new();
    for _ in 0..config.max_tokens {
        let mut pool: Vec<(f64, TokenId, usize)> = Vec::new();
        for (i, h) in active.iter().enumerate() {
            // the vocabulary may be unable to spell any continuation
            let candidates = match session.candidates(h) {
                Err(DecodeError::DeadEnd { .. }) => continue,
                other => other?,
            };
            for (t, s) in candidates {
                pool.push((h.logprob_sum + s, t, i));
            }
        }
        // zero-probability continuations only survive when nothing else does
        if pool.iter().any(|c| c.0 > f64::NEG_INFINITY) {
            pool.retain(|c| c.0 > f64::NEG_INFINITY);
        }
        pool.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut next = Vec::with_capacity(k);
        for (score, t, i) in pool {
            if next.len() == k {
                break;
            }
            let h = session.extend(&active[i], t, score - active[i].logprob_sum)?;
            if h.finished {
                finished.push(h);
            } else {
                next.push(h);
            }
        }
        active = next;
        if finished.len() >= k || active.is_empty() {
            break;
        }
    }
    if finished.is_empty() {
        let step = active.first().map_or(0, Hypothesis::len);
        let best = active
            .into_iter()
            .min_by(|a, b| rank_order(a, b, config.alpha))
            .ok_or(DecodeError::DeadEnd { step })?;
        return Ok(vec![best]);
    }
    finished.sort_by(|a, b| rank_order(a, b, config.alpha));
    Ok(finished)
}

fn rank_order(a: &Hypothesis, b: &Hypothesis, alpha: f64) -> std::cmp::Ordering {
    length_normalized_score(b, alpha)
        .total_cmp(&length_normalized_score(a, alpha))
        .then(a.ids.cmp(&b.ids))
}

/// Moves the best hypothesis that is not pure EOS to the front, keeping the
/// relative order of the others.
pub fn select_nonempty(ranked: &mut [Hypothesis], eos: TokenId) {
    if let Some(i) = ranked.iter().position(|h| !h.is_pure_eos(eos)) {
        ranked[..=i].rotate_right(1);
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EmptyStringReport {
    pub top_is_empty: bool,
    /// Length-normalization exponent at which ranks 1 and 2 swap, if they
    /// do for some alpha in `[0, 16]`.
    pub swap_alpha: Option<f64>,
}

/// Diagnoses the empty-string issue on a ranking.
pub fn empty_string_report(ranked: &[Hypothesis], eos: TokenId) -> EmptyStringReport {
    let top_is_empty = ranked.first().is_some_and(|h| h.is_pure_eos(eos));
    let swap_alpha = match ranked {
        [a, b, ..] => swap_threshold(a.logprob_sum, a.len(), b.logprob_sum, b.len()),
        _ => None,
    };
    EmptyStringReport {
        top_is_empty,
        swap_alpha,
    }
}

const ALPHA_MAX: f64 = 16.0;

/// Smallest `alpha` in `[0, 16]` where `s1/m1^alpha = s2/m2^alpha` and the
/// order actually changes there.
pub fn swap_threshold(s1: f64, m1: usize, s2: f64, m2: usize) -> Option<f64> {
    if !(s1.is_finite() && s2.is_finite()) {
        return None;
    }
    let f = |a: f64| normalized(s1, m1, a) - normalized(s2, m2, a);
    const STEPS: usize = 4096;
    let mut lo = 0.0;
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return Some(0.0);
    }
    for i in 1..=STEPS {
        let hi = ALPHA_MAX * i as f64 / STEPS as f64;
        let f_hi = f(hi);
        if f_hi == 0.0 {
            return Some(hi);
        }
        if (f_lo < 0.0) != (f_hi < 0.0) {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if (f(mid) < 0.0) == (f_lo < 0.0) {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return Some(0.5 * (a + b));
        }
        lo = hi;
        f_lo = f_hi;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::parse_grammar;

    fn v1() -> Vocabulary {
        Vocabulary::from_json(r#"{"eos":5,"tokens":["a","b","c","ab","bc",""]}"#).unwrap()
    }

    fn compile(src: &str) -> Arc<Recognizer> {
        Recognizer::compile(&parse_grammar(src).unwrap()).unwrap()
    }

    fn g1() -> Arc<Recognizer> {
        compile("start S; S ::= \"ab\" | \"ac\";")
    }

    #[test]
    fn greedy_uniform_breaks_ties_low() {
        let v = v1();
        let h =
            constrained_greedy(&uniform_scorer(6), &g1(), &v, &DecodeConfig::default()).unwrap();
        // token 0 ("a") beats token 3 ("ab"), then 1 ("b") beats 2 ("c")
        assert_eq!(h.ids, vec![0, 1, 5]);
        assert_eq!(h.text(&v), "ab");
        assert!(h.finished);
    }

    #[test]
    fn greedy_bigram() {
        let v = v1();
        let ninf = f64::NEG_INFINITY;
        let mut rows = std::collections::HashMap::new();
        rows.insert(None, vec![0.0, ninf, ninf, -5.0, ninf, ninf]);
        rows.insert(
            Some(0),
            vec![ninf, 0.9f64.ln(), 0.1f64.ln(), ninf, ninf, ninf],
        );
        rows.insert(Some(1), vec![ninf, ninf, ninf, ninf, ninf, 0.0]);
        let h = constrained_greedy(
            &BigramScorer::new(rows),
            &g1(),
            &v,
            &DecodeConfig::default(),
        )
        .unwrap();
        assert_eq!(h.text(&v), "ab");
    }

    #[test]
    fn epsilon_grammar_emits_eos() {
        let v = v1();
        let g = compile("start S; S ::= \"\";");
        let h = constrained_greedy(&uniform_scorer(6), &g, &v, &DecodeConfig::default()).unwrap();
        assert_eq!(h.ids, vec![5]);
    }

    #[test]
    fn length_normalization() {
        assert_eq!(normalized(-4.0, 3, 0.0), -4.0);
        assert!((normalized(-4.0, 3, 1.0) + 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(normalized(-1.0, 1, 7.3), -1.0);
    }

    /// EOS at step 0 scores -1; "ab" + EOS scores -4 in total.
    fn misaligned() -> ReplayScorer {
        let ninf = f64::NEG_INFINITY;
        ReplayScorer::new(vec![
            vec![-2.0, ninf, ninf, ninf, ninf, -1.0],
            vec![ninf, -1.5, ninf, ninf, ninf, ninf],
            vec![ninf, ninf, ninf, ninf, ninf, -0.5],
        ])
    }

    #[test]
    fn empty_string_wins_at_alpha_one() {
        let v = v1();
        let g = compile("start S; S ::= \"\" | \"ab\";");
        let config = DecodeConfig {
            select_nonempty: false,
            ..DecodeConfig::default()
        };
        let ranked = beam_search(&misaligned(), &g, &v, &config).unwrap();
        assert_eq!(ranked[0].ids, vec![5]);
        assert_eq!(ranked[1].ids, vec![0, 1, 5]);
        assert!((ranked[1].logprob_sum + 4.0).abs() < 1e-12);
        let report = empty_string_report(&ranked, 5);
        assert!(report.top_is_empty);
        let alpha = report.swap_alpha.unwrap();
        assert!((alpha - 4f64.ln() / 3f64.ln()).abs() < 1e-9, "{alpha}");

        let chosen = constrained_beam(&misaligned(), &g, &v, &DecodeConfig::default()).unwrap();
        assert_eq!(chosen[0].text(&v), "ab");

        let config = DecodeConfig {
            alpha: 2.0,
            select_nonempty: false,
            ..DecodeConfig::default()
        };
        let ranked = beam_search(&misaligned(), &g, &v, &config).unwrap();
        assert_eq!(ranked[0].text(&v), "ab");
    }

    #[test]
    fn report_edge_cases() {
        assert_eq!(swap_threshold(-1.0, 1, -1.0, 1), Some(0.0));
        assert_eq!(swap_threshold(-1.0, 2, -2.0, 2), None);
        let v = v1();
        let g = compile("start S; S ::= \"ab\";");
        let both = constrained_beam(&uniform_scorer(6), &g, &v, &DecodeConfig::default()).unwrap();
        // "ab"+EOS against "a"+"b"+EOS: -2L/2^a = -3L/3^a at a = 1
        let r = empty_string_report(&both, 5);
        assert!((r.swap_alpha.unwrap() - 1.0).abs() < 1e-9);
        let r = empty_string_report(&both[..1], 5);
        assert_eq!(r.swap_alpha, None);
        assert!(!r.top_is_empty);
    }

    #[test]
    fn beam_of_one_is_greedy() {
        let v = v1();
        let g = compile("start S; S ::= \"\" | \"a\" S | \"bc\" S;");
        for seed in 0..20 {
            let scorer = RandomScorer::new(6, seed);
            let config = DecodeConfig {
                beam_size: 1,
                max_tokens: 12,
                ..DecodeConfig::default()
            };
            let greedy = constrained_greedy(&scorer, &g, &v, &config).unwrap();
            let beam = constrained_beam(&scorer, &g, &v, &config).unwrap();
            assert_eq!(beam[0].ids, greedy.ids, "seed {seed}");
        }
    }

    #[test]
    fn truncation_returns_best_unfinished() {
        let v = v1();
        let g = compile("start S; S ::= \"a\" S | \"b\";");
        let ninf = f64::NEG_INFINITY;
        let scorer = ReplayScorer::new(vec![vec![0.0, -9.0, ninf, ninf, ninf, ninf]; 3]);
        let config = DecodeConfig {
            max_tokens: 3,
            ..DecodeConfig::default()
        };
        let out = constrained_beam(&scorer, &g, &v, &config).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].is_truncated());
        assert_eq!(out[0].ids, vec![0, 0, 0]);
    }

    #[test]
    fn renormalized_distribution_sums_to_one() {
        let v = v1();
        let g = g1();
        let s = g.initial_state().advance(b'a');
        let mask = crate::mask::compute_mask(&s, &v);
        let row = RandomScorer::new(6, 1).next_logprobs(&[]).unwrap();
        let dist = masked_distribution(&row, &mask, 5);
        assert_eq!(dist.iter().map(|d| d.0).collect::<Vec<_>>(), vec![1, 2]);
        let total: f64 = dist.iter().map(|d| d.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_config_and_rows() {
        let v = v1();
        let bad = DecodeConfig {
            beam_size: 0,
            ..DecodeConfig::default()
        };
        assert!(matches!(
            constrained_beam(&uniform_scorer(6), &g1(), &v, &bad),
            Err(DecodeError::Config(_))
        ));
        assert!(matches!(
            constrained_greedy(&uniform_scorer(4), &g1(), &v, &DecodeConfig::default()),
            Err(DecodeError::RowLength {
                expected: 6,
                got: 4
            })
        ));
    }
}
