//! Tokenizer vocabularies: the id → bytes table plus a byte trie over all
//! surface forms.
//!
//! On disk a vocabulary is JSON:
//!
//! ```json
//! {"eos": 5, "tokens": ["a", "b", "c", "ab", "bc", ""]}
//! ```
//!
//! The array index is the token id. A token that is not valid UTF-8 is
//! written as `{"b": "<base64>"}`. `tokens` may also be an object keyed by
//! decimal id, in which case the ids must be dense.

use std::path::Path;

use base64::Engine as _;
use serde::Deserialize;
use serde_json::Value;
use thiserror::Error;

use crate::trie::{NodeId, Trie, TrieBuilder};

pub type TokenId = u32;

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("malformed vocabulary: {0}")]
    Malformed(String),
    #[error("vocabulary has no eos declaration")]
    MissingEos,
    #[error("token ids are not dense: missing id {0}")]
    NonDense(usize),
    #[error("eos id {eos} out of range for {len} tokens")]
    EosOutOfRange { eos: TokenId, len: usize },
    #[error("eos token {0} must have an empty surface form")]
    EosNotEmpty(TokenId),
    #[error("token {0} has an empty surface form")]
    EmptyToken(TokenId),
    #[error("token id {id} out of range for {len} tokens")]
    OutOfRange { id: TokenId, len: usize },
    #[error("failed to read vocabulary {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone)]
pub struct Vocabulary {
    tokens: Vec<Vec<u8>>,
    eos: TokenId,
    trie: Trie<u8>,
}

impl Vocabulary {
    /// `tokens[eos]` must be empty and every other token non-empty.
    pub fn new(tokens: Vec<Vec<u8>>, eos: TokenId) -> Result<Self, VocabError> {
        if eos as usize >= tokens.len() {
            return Err(VocabError::EosOutOfRange {
                eos,
                len: tokens.len(),
            });
        }
        if !tokens[eos as usize].is_empty() {
            return Err(VocabError::EosNotEmpty(eos));
        }
        let mut builder = TrieBuilder::new();
        for (id, bytes) in tokens.iter().enumerate() {
            if id as TokenId == eos {
                continue;
            }
            if bytes.is_empty() {
                return Err(VocabError::EmptyToken(id as TokenId));
            }
            builder.insert(bytes, id as TokenId);
        }
        Ok(Vocabulary {
            tokens,
            eos,
            trie: builder.build(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self, VocabError> {
        #[derive(Deserialize)]
        struct Raw {
            eos: Option<TokenId>,
            tokens: Value,
        }
        let raw: Raw =
            serde_json::from_str(text).map_err(|e| VocabError::Malformed(e.to_string()))?;
        let eos = raw.eos.ok_or(VocabError::MissingEos)?;
        let tokens = match raw.tokens {
            Value::Array(items) => items.iter().map(decode_token).collect::<Result<_, _>>()?,
            Value::Object(map) => {
                let mut slots: Vec<Option<Vec<u8>>> = vec![None; map.len()];
                for (key, v) in &map {
                    let id: usize = key
                        .parse()
                        .map_err(|_| VocabError::Malformed(format!("bad token id {key:?}")))?;
                    if id >= slots.len() {
                        // some smaller id is necessarily absent
                        let missing = (0..slots.len()).find(|i| !map.contains_key(&i.to_string()));
                        return Err(VocabError::NonDense(missing.unwrap_or(slots.len())));
                    }
                    slots[id] = Some(decode_token(v)?);
                }
                slots
                    .into_iter()
                    .enumerate()
                    .map(|(i, s)| s.ok_or(VocabError::NonDense(i)))
                    .collect::<Result<_, _>>()?
            }
            _ => {
                return Err(VocabError::Malformed(
                    "`tokens` must be an array or object".into(),
                ))
            }
        };
        Vocabulary::new(tokens, eos)
    }

    pub fn to_json(&self) -> String {
        let tokens: Vec<Value> = self
            .tokens
            .iter()
            .map(|t| match std::str::from_utf8(t) {
                Ok(s) => Value::String(s.to_owned()),
                Err(_) => serde_json::json!({
                    "b": base64::engine::general_purpose::STANDARD.encode(t)
                }),
            })
            .collect();
        serde_json::json!({"eos": self.eos, "tokens": tokens}).to_string()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn eos(&self) -> TokenId {
        self.eos
    }

    pub fn token(&self, id: TokenId) -> Option<&[u8]> {
        self.tokens.get(id as usize).map(Vec::as_slice)
    }

    pub fn tokens(&self) -> &[Vec<u8>] {
        &self.tokens
    }

    pub fn trie(&self) -> &Trie<u8> {
        &self.trie
    }

    /// Ids whose surface form is exactly `bytes`.
    pub fn lookup(&self, bytes: &[u8]) -> &[TokenId] {
        match self.trie.walk(bytes) {
            Some(node) => self.trie.payload(node),
            None => &[],
        }
    }

    pub fn detokenize(&self, ids: &[TokenId]) -> Result<Vec<u8>, VocabError> {
        let mut out = Vec::new();
        for &id in ids {
            let bytes = self.token(id).ok_or(VocabError::OutOfRange {
                id,
                len: self.tokens.len(),
            })?;
            out.extend_from_slice(bytes);
        }
        Ok(out)
    }

    /// Greedy longest-match tokenization; among tokens with the same surface
    /// form the lowest id wins. Returns `None` when some byte is not covered
    /// by any token.
    pub fn greedy_tokenize(&self, bytes: &[u8]) -> Option<Vec<TokenId>> {
        let mut out = Vec::new();
        let mut pos = 0;
        while pos < bytes.len() {
            let mut node: NodeId = Trie::<u8>::ROOT;
            let mut best: Option<(usize, TokenId)> = None;
            for (offset, &b) in bytes[pos..].iter().enumerate() {
                match self.trie.child(node, b) {
                    Some(next) => node = next,
                    None => break,
                }
                if let Some(&id) = self.trie.payload(node).first() {
                    best = Some((offset + 1, id));
                }
            }
            let (len, id) = best?;
            out.push(id);
            pos += len;
        }
        Some(out)
    }
}

fn decode_token(v: &Value) -> Result<Vec<u8>, VocabError> {
    match v {
        Value::String(s) => Ok(s.as_bytes().to_vec()),
        Value::Object(map) if map.len() == 1 => match map.get("b") {
            Some(Value::String(b64)) => base64::engine::general_purpose::STANDARD
                .decode(b64)
                .map_err(|e| VocabError::Malformed(format!("bad base64 token: {e}"))),
            _ => Err(VocabError::Malformed(
                "token object must be {\"b\": base64}".into(),
            )),
        },
        other => Err(VocabError::Malformed(format!("bad token entry {other}"))),
    }
}

pub fn load_vocab(path: impl AsRef<Path>) -> Result<Vocabulary, VocabError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| VocabError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Vocabulary::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn v1() -> Vocabulary {
        Vocabulary::from_json(r#"{"eos":5,"tokens":["a","b","c","ab","bc",""]}"#).unwrap()
    }

    #[test]
    fn loads_small_vocab() {
        let v = v1();
        assert_eq!(v.len(), 6);
        assert_eq!(v.eos(), 5);
        let surface = v.trie().node_count() - 1;
        // a, b, c, ab, bc: five accepting nodes besides the root
        let accepting = (0..v.trie().node_count() as u32)
            .filter(|&n| v.trie().is_accepting(n))
            .count();
        assert_eq!(accepting, 5);
        assert_eq!(surface, 5);
    }

    #[test]
    fn duplicate_surface_forms_share_a_node() {
        let v = Vocabulary::from_json(r#"{"eos":0,"tokens":["","x","x"]}"#).unwrap();
        assert_eq!(v.lookup(b"x"), &[1, 2]);
    }

    #[test]
    fn base64_tokens() {
        let v = Vocabulary::from_json(r#"{"eos":1,"tokens":[{"b":"/w=="},""]}"#).unwrap();
        assert_eq!(v.token(0), Some(&[0xffu8][..]));
        let again = Vocabulary::from_json(&v.to_json()).unwrap();
        assert_eq!(again.tokens(), v.tokens());
    }

    #[test]
    fn object_form_must_be_dense() {
        let ok = Vocabulary::from_json(r#"{"eos":1,"tokens":{"1":"","0":"a"}}"#).unwrap();
        assert_eq!(ok.token(0), Some(&b"a"[..]));
        let err = Vocabulary::from_json(r#"{"eos":0,"tokens":{"0":"","2":"a"}}"#).unwrap_err();
        assert!(matches!(err, VocabError::NonDense(1)), "{err}");
    }

    #[test]
    fn load_errors() {
        assert!(matches!(
            Vocabulary::from_json(r#"{"tokens":["a"]}"#),
            Err(VocabError::MissingEos)
        ));
        assert!(matches!(
            Vocabulary::from_json("{"),
            Err(VocabError::Malformed(_))
        ));
        assert!(matches!(
            Vocabulary::from_json(r#"{"eos":0,"tokens":["a"]}"#),
            Err(VocabError::EosNotEmpty(0))
        ));
        assert!(matches!(
            Vocabulary::from_json(r#"{"eos":0,"tokens":["",""]}"#),
            Err(VocabError::EmptyToken(1))
        ));
    }

    #[test]
    fn detokenize_examples() {
        let v = v1();
        assert_eq!(v.detokenize(&[3]).unwrap(), b"ab");
        assert_eq!(v.detokenize(&[0, 1]).unwrap(), b"ab");
        assert_eq!(v.detokenize(&[3, 5]).unwrap(), b"ab");
        assert!(matches!(
            v.detokenize(&[9]),
            Err(VocabError::OutOfRange { id: 9, .. })
        ));
    }

    #[test]
    fn greedy_longest_match() {
        let v = v1();
        assert_eq!(v.greedy_tokenize(b"ab"), Some(vec![3]));
        assert_eq!(v.greedy_tokenize(b"ac"), Some(vec![0, 2]));
        assert_eq!(v.greedy_tokenize(b""), Some(vec![]));
        assert_eq!(v.greedy_tokenize(b"ax"), None);
    }

    #[test]
    fn large_vocab_lookup_matches_table() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut tokens: Vec<Vec<u8>> = (0..32_000)
            .map(|_| {
                let len = rng.random_range(1..=6);
                (0..len).map(|_| rng.random_range(b'a'..=b'p')).collect()
            })
            .collect();
        tokens.push(Vec::new());
        let v = Vocabulary::new(tokens, 32_000).unwrap();
        assert!(v.trie().node_count() <= 1 + v.tokens().iter().map(Vec::len).sum::<usize>());
        for _ in 0..1000 {
            let id = rng.random_range(0..32_000u32);
            let bytes = v.token(id).unwrap();
            assert!(v.lookup(bytes).contains(&id));
            let scan: Vec<TokenId> = (0..v.len() as u32)
                .filter(|&i| i != v.eos() && v.token(i).unwrap() == bytes)
                .collect();
            assert_eq!(v.lookup(bytes), scan.as_slice());
        }
    }

    proptest! {
        #[test]
        fn detokenize_is_a_homomorphism(
            a in proptest::collection::vec(0u32..6, 0..8),
            b in proptest::collection::vec(0u32..6, 0..8),
        ) {
            let v = v1();
            let mut ab = a.clone();
            ab.extend(&b);
            let mut joined = v.detokenize(&a).unwrap();
            joined.extend(v.detokenize(&b).unwrap());
            prop_assert_eq!(v.detokenize(&ab).unwrap(), joined);
        }
    }
}
