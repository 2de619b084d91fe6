//! Grammar-constrained decoding.
//!
//! A character-level [`Grammar`] is compiled once into a byte-level
//! [`Recognizer`]. At every decoding step [`compute_mask`] intersects the
//! recognizer's admissible next bytes with the vocabulary trie and returns
//! the exact set of tokens that keep the output a viable prefix of the
//! language. The same grammar works with any vocabulary.
//!
//! Task grammars for closed information extraction, entity disambiguation
//! and constituency parsing are built per input in [`templates`];
//! [`decoder`] runs constrained greedy and beam search over a [`Scorer`];
//! [`metrics`] scores the outputs.

pub mod catalog;
pub mod decoder;
pub mod earley;
pub mod grammar;
pub mod mask;
pub mod metrics;
pub mod overhead;
pub mod synth;
pub mod templates;
pub mod token_grammar;
pub mod trie;
pub mod vocab;

pub use catalog::{load_catalog, Catalog, CatalogError};
pub use decoder::{
    constrained_beam, constrained_greedy, empty_string_report, length_normalized_score,
    DecodeConfig, DecodeError, EmptyStringReport, Hypothesis, Scorer,
};
pub use earley::{ByteSet, CompileError, ParserState, Recognizer};
pub use grammar::{parse_grammar, validate, Diagnostic, Grammar, GrammarBuilder, ParseError};
pub use mask::{advance_token, compute_mask, MaskCache, MaskError, TokenMask};
pub use token_grammar::{compile_token_grammar, token_grammar_mask, TokenGrammar};
pub use vocab::{load_vocab, TokenId, VocabError, Vocabulary};
