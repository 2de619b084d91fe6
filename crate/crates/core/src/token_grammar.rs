//! Token-level grammars: every terminal of a byte grammar is replaced by one
//! fixed tokenization of it.
//!
//! The resulting language holds only the sequences built from those
//! tokenizations. A string the byte grammar accepts can still be rejected
//! here when the decoder tokenizes it differently (`"[" "[" "["` versus the
//! canonical `"[[" "["`), so the detokenized token language is a subset of
//! the byte language, not necessarily equal to it.

use std::sync::Arc;

use thiserror::Error;

use crate::earley::{CompileError, CompiledGrammar, State, Symbol};
use crate::grammar::{validate, Grammar, RhsItem};
use crate::mask::{MaskError, TokenMask};
use crate::trie::TrieBuilder;
use crate::vocab::{TokenId, Vocabulary};

#[derive(Debug, Error)]
pub enum TokenGrammarError {
    #[error(transparent)]
    Invalid(#[from] CompileError),
    #[error("tokenization of {terminal:?} does not detokenize back to it")]
    RoundTrip { terminal: String },
    #[error("prefix is not viable at token {position}")]
    NonViablePrefix { position: usize },
    #[error(transparent)]
    Mask(#[from] MaskError),
}

/// Token-level rules mirroring a byte grammar.
#[derive(Debug, Clone)]
pub struct TokenGrammar {
    compiled: Arc<CompiledGrammar<TokenId>>,
    rules: Vec<(u32, Vec<TokenRhs>)>,
    vocab_len: usize,
    eos: TokenId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenRhs {
    Tokens(Vec<TokenId>),
    Nonterminal(u32),
    LexSet(String),
}

impl TokenGrammar {
    /// Rules in source order with terminals replaced by token sequences.
    pub fn rules(&self) -> &[(u32, Vec<TokenRhs>)] {
        &self.rules
    }

    pub fn initial_state(&self) -> State<TokenId> {
        self.compiled.initial_state()
    }

    /// Replays `prefix`, failing at the first token that leaves the language.
    pub fn state_after(&self, prefix: &[TokenId]) -> Result<State<TokenId>, TokenGrammarError> {
        let mut s = self.initial_state();
        for (position, &t) in prefix.iter().enumerate() {
            s = s
                .try_advance(t)
                .ok_or(TokenGrammarError::NonViablePrefix { position })?;
        }
        Ok(s)
    }

    pub fn mask_at(&self, state: &State<TokenId>) -> TokenMask {
        let mut mask = TokenMask::new(self.vocab_len);
        for t in state.next_terminals() {
            mask.allowed_mut().insert(t as usize);
        }
        mask.set_eos(state.is_complete());
        mask
    }

    pub fn accepts(&self, ids: &[TokenId]) -> bool {
        let ids = ids.strip_suffix(&[self.eos]).unwrap_or(ids);
        self.state_after(ids).is_ok_and(|s| s.is_complete())
    }
}

/// Tokenizes every terminal and lexset entry with `tokenize` and checks
/// that each tokenization detokenizes back to its source bytes.
pub fn compile_token_grammar(
    grammar: &Grammar,
    vocab: &Vocabulary,
    tokenize: impl Fn(&[u8]) -> Vec<TokenId>,
) -> Result<TokenGrammar, TokenGrammarError> {
    let diagnostics = validate(grammar);
    if !diagnostics.is_empty() {
        return Err(CompileError::Invalid(diagnostics).into());
    }
    let canonical = |bytes: &[u8]| -> Result<Vec<TokenId>, TokenGrammarError> {
        let ids = tokenize(bytes);
        let ok =
            !ids.contains(&vocab.eos()) && vocab.detokenize(&ids).is_ok_and(|round| round == bytes);
        if ok {
            Ok(ids)
        } else {
            Err(TokenGrammarError::RoundTrip {
                terminal: String::from_utf8_lossy(bytes).into_owned(),
            })
        }
    };

    let names = grammar.lexset_names();
    let mut lexsets = Vec::with_capacity(names.len());
    for name in &names {
        let catalog = grammar.catalog(name).expect("validated");
        let mut builder = TrieBuilder::new();
        for (i, entry) in catalog.entries().iter().enumerate() {
            builder.insert(&canonical(entry)?, i as u32);
        }
        lexsets.push(Arc::new(builder.build()));
    }

    let mut rules = Vec::with_capacity(grammar.rules().len());
    let mut lowered = Vec::with_capacity(grammar.rules().len());
    for rule in grammar.rules() {
        let mut rhs = Vec::new();
        let mut syms = Vec::new();
        for item in &rule.rhs {
            match item {
                RhsItem::Terminal(bytes) => {
                    let ids = canonical(bytes)?;
                    syms.extend(ids.iter().map(|&t| Symbol::Terminal(t)));
                    rhs.push(TokenRhs::Tokens(ids));
                }
                RhsItem::Nonterminal(id) => {
                    syms.push(Symbol::Nonterminal(id.0));
                    rhs.push(TokenRhs::Nonterminal(id.0));
                }
                RhsItem::LexSet(name) => {
                    let idx = names.binary_search(&name.as_str()).expect("collected");
                    syms.push(Symbol::LexSet(idx as u32));
                    rhs.push(TokenRhs::LexSet(name.clone()));
                }
            }
        }
        rules.push((rule.lhs.0, rhs));
        lowered.push((rule.lhs.0, syms));
    }
    let compiled: Arc<CompiledGrammar<TokenId>> = CompiledGrammar::from_parts(
        grammar.nonterminal_count(),
        grammar.start().0,
        lowered,
        lexsets,
    );
    Ok(TokenGrammar {
        compiled,
        rules,
        vocab_len: vocab.len(),
        eos: vocab.eos(),
    })
}

/// Tokens `t` such that `prefix · t` is still a viable token-level prefix.
pub fn token_grammar_mask(
    tg: &TokenGrammar,
    prefix: &[TokenId],
) -> Result<TokenMask, TokenGrammarError> {
    Ok(tg.mask_at(&tg.state_after(prefix)?))
}

/// Greedy longest-match tokenizer bound to `vocab`, suitable for
/// [`compile_token_grammar`]. Uncoverable input yields an empty sequence,
/// which the round-trip check then rejects.
pub fn greedy_tokenizer(vocab: &Vocabulary) -> impl Fn(&[u8]) -> Vec<TokenId> + '_ {
    move |bytes| vocab.greedy_tokenize(bytes).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::earley::Recognizer;
    use crate::grammar::parse_grammar;
    use crate::mask::compute_mask;

    fn v1() -> Vocabulary {
        Vocabulary::from_json(r#"{"eos":5,"tokens":["a","b","c","ab","bc",""]}"#).unwrap()
    }

    #[test]
    fn g1_greedy_terminals() {
        let v = v1();
        let g = parse_grammar("start S; S ::= \"ab\" | \"ac\";").unwrap();
        let tg = compile_token_grammar(&g, &v, greedy_tokenizer(&v)).unwrap();
        assert_eq!(tg.rules()[0].1, vec![TokenRhs::Tokens(vec![3])]);
        assert_eq!(tg.rules()[1].1, vec![TokenRhs::Tokens(vec![0, 2])]);

        let m = token_grammar_mask(&tg, &[]).unwrap();
        assert_eq!(m.allowed_ids(), vec![0, 3]);
        let m = token_grammar_mask(&tg, &[0]).unwrap();
        assert_eq!((m.allowed_ids(), m.eos_allowed()), (vec![2], false));
        let m = token_grammar_mask(&tg, &[3]).unwrap();
        assert_eq!((m.allowed_ids(), m.eos_allowed()), (vec![], true));
        assert!(matches!(
            token_grammar_mask(&tg, &[1]),
            Err(TokenGrammarError::NonViablePrefix { position: 0 })
        ));
    }

    #[test]
    fn bracket_ambiguity_witness() {
        let v = Vocabulary::from_json(r#"{"eos":2,"tokens":["[[","[",""]}"#).unwrap();
        let g = parse_grammar("start S; S ::= \"[[[\";").unwrap();
        let tg = compile_token_grammar(&g, &v, greedy_tokenizer(&v)).unwrap();
        assert_eq!(tg.rules()[0].1, vec![TokenRhs::Tokens(vec![0, 1])]);
        assert!(tg.accepts(&[0, 1]));
        // "[" "[" "[" spells the same bytes but is not the canonical form
        assert!(!tg.accepts(&[1, 1, 1]));
        let r = Recognizer::compile(&g).unwrap();
        let mut s = r.initial_state();
        for _ in 0..3 {
            assert!(compute_mask(&s, &v).allows(1));
            s = crate::mask::advance_token(&s, &v, 1).unwrap();
        }
        assert!(s.is_complete());
    }

    #[test]
    fn epsilon_terminal_is_empty_sequence() {
        let v = v1();
        let g = parse_grammar("start S; S ::= \"\";").unwrap();
        let tg = compile_token_grammar(&g, &v, greedy_tokenizer(&v)).unwrap();
        assert_eq!(tg.rules()[0].1, vec![TokenRhs::Tokens(vec![])]);
        assert!(token_grammar_mask(&tg, &[]).unwrap().eos_allowed());
    }

    #[test]
    fn lossy_tokenizer_is_rejected() {
        let v = v1();
        let g = parse_grammar("start S; S ::= \"abx\";").unwrap();
        assert!(matches!(
            compile_token_grammar(&g, &v, greedy_tokenizer(&v)),
            Err(TokenGrammarError::RoundTrip { .. })
        ));
        let g = parse_grammar("start S; S ::= \"ab\";").unwrap();
        assert!(matches!(
            compile_token_grammar(&g, &v, |_| vec![0]),
            Err(TokenGrammarError::RoundTrip { .. })
        ));
    }
}
