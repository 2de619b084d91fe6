//! Next-token masks: a depth-first walk of the vocabulary trie in lockstep
//! with the byte-level parser state. A subtree is skipped as soon as its
//! edge byte is not admissible, so work scales with the number of viable
//! token prefixes rather than with vocabulary size.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex};

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::earley::ParserState;
use crate::trie::{NodeId, Trie};
use crate::vocab::{TokenId, Vocabulary};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MaskError {
    #[error("token {token} is not admissible at this state")]
    Rejected { token: TokenId },
    #[error("token {token} out of range for {len} tokens")]
    OutOfRange { token: TokenId, len: usize },
}

#[derive(Clone, PartialEq, Eq)]
pub struct TokenMask {
    allowed: FixedBitSet,
    eos_allowed: bool,
}

impl TokenMask {
    pub fn new(len: usize) -> Self {
        TokenMask {
            allowed: FixedBitSet::with_capacity(len),
            eos_allowed: false,
        }
    }

    pub fn from_parts(allowed: FixedBitSet, eos_allowed: bool) -> Self {
        TokenMask {
            allowed,
            eos_allowed,
        }
    }

    pub fn allows(&self, id: TokenId) -> bool {
        self.allowed.contains(id as usize)
    }

    pub fn eos_allowed(&self) -> bool {
        self.eos_allowed
    }

    pub fn allowed(&self) -> &FixedBitSet {
        &self.allowed
    }

    pub fn allowed_ids(&self) -> Vec<TokenId> {
        self.allowed.ones().map(|i| i as TokenId).collect()
    }

    pub fn count(&self) -> usize {
        self.allowed.count_ones(..)
    }

    /// Non-EOS tokens allowed, or EOS allowed.
    pub fn is_empty(&self) -> bool {
        !self.eos_allowed && self.allowed.is_clear()
    }

    /// Whether the decoder may emit `id`, counting EOS through the flag.
    pub fn permits(&self, id: TokenId, eos: TokenId) -> bool {
        if id == eos {
            self.eos_allowed
        } else {
            self.allows(id)
        }
    }

    /// `ceil(len / 8)` bytes; bit `i % 8` of byte `i / 8` is token `i`.
    pub fn to_bitset_bytes(&self) -> Vec<u8> {
        let len = self.allowed.len();
        let mut out = vec![0u8; len.div_ceil(8)];
        for i in self.allowed.ones() {
            out[i / 8] |= 1 << (i % 8);
        }
        out
    }

    pub(crate) fn allowed_mut(&mut self) -> &mut FixedBitSet {
        &mut self.allowed
    }

    pub(crate) fn set_eos(&mut self, eos: bool) {
        self.eos_allowed = eos;
    }
}

impl std::fmt::Debug for TokenMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TokenMask")
            .field("allowed", &self.allowed_ids())
            .field("eos", &self.eos_allowed)
            .finish()
    }
}

/// Tokens admissible after `state`. EOS is reported through the flag only.
pub fn compute_mask(state: &ParserState, vocab: &Vocabulary) -> TokenMask {
    let mut mask = TokenMask::new(vocab.len());
    mask.eos_allowed = state.is_complete();
    if state.is_viable() {
        walk(state, vocab.trie(), Trie::<u8>::ROOT, &mut mask.allowed);
    }
    mask
}

fn walk(state: &ParserState, trie: &Trie<u8>, node: NodeId, out: &mut FixedBitSet) {
    let bytes = state.allowed_bytes();
    if bytes.is_empty() {
        return;
    }
    let mut visit = |b: u8, child: NodeId| {
        for &id in trie.payload(child) {
            out.insert(id as usize);
        }
        // b is admissible, so the advanced state is viable; only descend
        // if there are longer tokens below
        if trie.has_children(child) {
            walk(&state.advance(b), trie, child, out);
        }
    };
    if bytes.len() < trie.child_count(node) {
        for b in bytes.iter() {
            if let Some(child) = trie.child(node, b) {
                visit(b, child);
            }
        }
    } else {
        for (b, child) in trie.children(node) {
            if bytes.contains(b) {
                visit(b, child);
            }
        }
    }
}

/// Advances over every byte of `token`. EOS (no bytes) is accepted only at a
/// complete state and leaves the state unchanged.
pub fn advance_token(
    state: &ParserState,
    vocab: &Vocabulary,
    token: TokenId,
) -> Result<ParserState, MaskError> {
    let bytes = vocab.token(token).ok_or(MaskError::OutOfRange {
        token,
        len: vocab.len(),
    })?;
    if token == vocab.eos() {
        return if state.is_complete() {
            Ok(state.clone())
        } else {
            Err(MaskError::Rejected { token })
        };
    }
    let mut s = state.clone();
    for &b in bytes {
        s = s.try_advance(b).ok_or(MaskError::Rejected { token })?;
    }
    Ok(s)
}

/// The `GCDKIT_CACHE` environment variable as a cache capacity, or `default`
/// when unset or unparsable.
pub fn capacity_from_env(default: usize) -> usize {
    std::env::var("GCDKIT_CACHE")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(default)
}

/// Bounded memo of masks keyed by state fingerprint. Entries are evicted in
/// insertion order. One cache must only ever see states of a single
/// grammar/vocabulary pair.
#[derive(Debug)]
pub struct MaskCache {
    capacity: usize,
    inner: Mutex<CacheInner>,
}

#[derive(Debug, Default)]
struct CacheInner {
    map: HashMap<u64, Arc<TokenMask>>,
    order: VecDeque<u64>,
    hits: u64,
    misses: u64,
}

impl MaskCache {
    pub fn new(capacity: usize) -> Self {
        MaskCache {
            capacity,
            inner: Mutex::new(CacheInner::default()),
        }
    }

    /// Capacity from `GCDKIT_CACHE`, or `default` when unset or unparsable.
    pub fn from_env(default: usize) -> Self {
        Self::new(capacity_from_env(default))
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(hits, misses)` so far.
    pub fn stats(&self) -> (u64, u64) {
        let inner = self.inner.lock().unwrap();
        (inner.hits, inner.misses)
    }

    pub fn get_or_compute(&self, state: &ParserState, vocab: &Vocabulary) -> Arc<TokenMask> {
        if self.capacity == 0 {
            return Arc::new(compute_mask(state, vocab));
        }
        let key = state.fingerprint();
        {
            let mut inner = self.inner.lock().unwrap();
            if let Some(m) = inner.map.get(&key).cloned() {
                inner.hits += 1;
                return m;
            }
            inner.misses += 1;
        }
        // computed outside the lock; a racing insert of the same key is
        // harmless because both values are equal
        let mask = Arc::new(compute_mask(state, vocab));
        let mut inner = self.inner.lock().unwrap();
        if inner.map.insert(key, mask.clone()).is_none() {
            inner.order.push_back(key);
            while inner.order.len() > self.capacity {
                if let Some(old) = inner.order.pop_front() {
                    inner.map.remove(&old);
                }
            }
        }
        mask
    }
}
