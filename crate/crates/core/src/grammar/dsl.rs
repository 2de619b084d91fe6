//! The `.gcd` grammar text format.
//!
//! ```text
//! # comment
//! start S;
//! S ::= "" | T Rest;
//! T ::= "[s] " @entities " [r] " @relations " [o] " @entities;
//! ```
//!
//! Terminals are double-quoted and support the escapes `\"`, `\\`, `\n` and
//! `\xNN`. The trailing `;` of a rule may be omitted when the next rule
//! begins. Without a `start` pragma the first rule's head is the start
//! symbol.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Grammar, GrammarBuilder, RhsItem, SymbolId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: duplicate start declaration")]
    DuplicateStart { line: usize, column: usize },
    #[error("{line}:{column}: unknown escape sequence `\\{escape}`")]
    UnknownEscape {
        line: usize,
        column: usize,
        escape: char,
    },
    #[error("grammar has no rules")]
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(Vec<u8>),
    LexSet(String),
    Define,
    Pipe,
    Semi,
    Eof,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    column: usize,
}

fn is_ident_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_'
}

fn is_ident_char(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'-' || b == b'.'
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            column: 1,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.column = 1;
        } else if b & 0xC0 != 0x80 {
            // count scalar values, not continuation bytes
            self.column += 1;
        }
        Some(b)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }

    fn skip_trivia(&mut self) {
        while let Some(b) = self.peek() {
            if b.is_ascii_whitespace() {
                self.bump();
            } else if b == b'#' || (b == b'/' && self.src.get(self.pos + 1) == Some(&b'/')) {
                while let Some(c) = self.peek() {
                    if c == b'\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.peek().is_some_and(is_ident_char) {
            self.bump();
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn hex_digit(&mut self) -> Result<u8, ParseError> {
        let b = self
            .peek()
            .ok_or_else(|| self.error("unterminated string"))?;
        let v = (b as char)
            .to_digit(16)
            .ok_or_else(|| self.error("expected two hex digits after `\\x`"))?;
        self.bump();
        Ok(v as u8)
    }

    fn string(&mut self) -> Result<Vec<u8>, ParseError> {
        self.bump();
        let mut out = Vec::new();
        loop {
            let (line, column) = (self.line, self.column);
            match self.bump() {
                None => return Err(self.error("unterminated string")),
                Some(b'"') => return Ok(out),
                Some(b'\\') => match self.bump() {
                    Some(b'"') => out.push(b'"'),
                    Some(b'\\') => out.push(b'\\'),
                    Some(b'n') => out.push(b'\n'),
                    Some(b'x') => {
                        let hi = self.hex_digit()?;
                        let lo = self.hex_digit()?;
                        out.push(hi << 4 | lo);
                    }
                    Some(other) => {
                        return Err(ParseError::UnknownEscape {
                            line,
                            column,
                            escape: other as char,
                        })
                    }
                    None => return Err(self.error("unterminated string")),
                },
                Some(b) => out.push(b),
            }
        }
    }

    fn next(&mut self) -> Result<Spanned, ParseError> {
        self.skip_trivia();
        let (line, column) = (self.line, self.column);
        let tok = match self.peek() {
            None => Tok::Eof,
            Some(b'"') => Tok::Str(self.string()?),
            Some(b'|') => {
                self.bump();
                Tok::Pipe
            }
            Some(b';') => {
                self.bump();
                Tok::Semi
            }
            Some(b':') => {
                if self.src[self.pos..].starts_with(b"::=") {
                    for _ in 0..3 {
                        self.bump();
                    }
                    Tok::Define
                } else {
                    return Err(self.error("expected `::=`"));
                }
            }
            Some(b'@') => {
                self.bump();
                if !self.peek().is_some_and(is_ident_start) {
                    return Err(self.error("expected lexset name after `@`"));
                }
                Tok::LexSet(self.ident())
            }
            Some(b) if is_ident_start(b) => Tok::Ident(self.ident()),
            Some(b) => return Err(self.error(format!("unexpected character {:?}", b as char))),
        };
        Ok(Spanned { tok, line, column })
    }
}

/// Parses DSL text into a grammar with no catalogs bound.
pub fn parse_grammar(text: &str) -> Result<Grammar, ParseError> {
    let mut lexer = Lexer::new(text);
    let mut toks = Vec::new();
    loop {
        let t = lexer.next()?;
        let eof = t.tok == Tok::Eof;
        toks.push(t);
        if eof {
            break;
        }
    }

    let mut builder = GrammarBuilder::new();
    let mut start: Option<String> = None;
    let mut first_lhs: Option<SymbolId> = None;
    let mut i = 0;
    let err = |t: &Spanned, message: &str| ParseError::Syntax {
        line: t.line,
        column: t.column,
        message: message.to_owned(),
    };

    while toks[i].tok != Tok::Eof {
        match &toks[i].tok {
            Tok::Ident(kw) if kw == "start" && !matches!(toks[i + 1].tok, Tok::Define) => {
                let Tok::Ident(name) = &toks[i + 1].tok else {
                    return Err(err(&toks[i + 1], "expected symbol name after `start`"));
                };
                if start.is_some() {
                    return Err(ParseError::DuplicateStart {
                        line: toks[i].line,
                        column: toks[i].column,
                    });
                }
                start = Some(name.clone());
                i += 2;
                if toks[i].tok != Tok::Semi {
                    return Err(err(&toks[i], "expected `;` after start declaration"));
                }
                i += 1;
            }
            Tok::Ident(name) => {
                if toks[i + 1].tok != Tok::Define {
                    return Err(err(&toks[i + 1], "expected `::=`"));
                }
                let lhs = builder.symbol(name);
                first_lhs.get_or_insert(lhs);
                i += 2;
                let mut alt = Vec::new();
                loop {
                    match &toks[i].tok {
                        Tok::Str(bytes) => alt.push(RhsItem::Terminal(bytes.clone())),
                        Tok::LexSet(n) => alt.push(RhsItem::LexSet(n.clone())),
                        Tok::Ident(n)
                            if toks[i + 1].tok == Tok::Define
                                || (n == "start" && matches!(toks[i + 1].tok, Tok::Ident(_))) =>
                        {
                            builder.rule(lhs, std::mem::take(&mut alt));
                            break;
                        }
                        Tok::Ident(n) => alt.push(RhsItem::Nonterminal(builder.symbol(n))),
                        Tok::Pipe => {
                            builder.rule(lhs, std::mem::take(&mut alt));
                        }
                        Tok::Semi => {
                            builder.rule(lhs, std::mem::take(&mut alt));
                            i += 1;
                            break;
                        }
                        Tok::Eof => {
                            builder.rule(lhs, std::mem::take(&mut alt));
                            break;
                        }
                        Tok::Define => return Err(err(&toks[i], "unexpected `::=`")),
                    }
                    i += 1;
                }
            }
            _ => return Err(err(&toks[i], "expected rule or start declaration")),
        }
    }

    let start = match start {
        Some(name) => builder.symbol(&name),
        None => first_lhs.ok_or(ParseError::Empty)?,
    };
    if builder.rules.is_empty() {
        return Err(ParseError::Empty);
    }
    Ok(builder.build(start))
}

pub(super) fn quote(bytes: &[u8], out: &mut String) {
    out.push('"');
    for &b in bytes {
        match b {
            b'"' => out.push_str("\\\""),
            b'\\' => out.push_str("\\\\"),
            b'\n' => out.push_str("\\n"),
            0x20..=0x7e => out.push(b as char),
            _ => {
                let _ = write!(out, "\\x{b:02x}");
            }
        }
    }
    out.push('"');
}

pub(super) fn print(g: &Grammar) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "start {};", g.name(g.start));
    let mut idx = 0;
    let rules = &g.rules;
    while idx < rules.len() {
        let lhs = rules[idx].lhs;
        let _ = write!(out, "{} ::=", g.name(lhs));
        let mut first = true;
        while idx < rules.len() && rules[idx].lhs == lhs {
            if !first {
                out.push_str(" |");
            }
            first = false;
            for item in &rules[idx].rhs {
                out.push(' ');
                match item {
                    RhsItem::Terminal(bytes) => quote(bytes, &mut out),
                    RhsItem::Nonterminal(id) => out.push_str(g.name(*id)),
                    RhsItem::LexSet(name) => {
                        out.push('@');
                        out.push_str(name);
                    }
                }
            }
            idx += 1;
        }
        out.push_str(";\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn alternation_expands_to_rules() {
        let g = parse_grammar("start S;\nS ::= \"ab\" | \"ac\";").unwrap();
        assert_eq!(g.rules().len(), 2);
        assert_eq!(g.nonterminal_count(), 1);
        assert_eq!(g.rules()[1].rhs, vec![RhsItem::Terminal(b"ac".to_vec())]);
    }

    #[test]
    fn semicolon_optional_between_rules() {
        let g = parse_grammar("S ::= \"a\" A\nA ::= \"b\" | \"c\"").unwrap();
        assert_eq!(g.rules().len(), 3);
        assert_eq!(g.name(g.start()), "S");
    }

    #[test]
    fn epsilon_rule() {
        let g = parse_grammar("start S; S ::= \"\";").unwrap();
        assert_eq!(g.rules()[0].rhs, vec![RhsItem::Terminal(vec![])]);
        let g2 = parse_grammar("start S; S ::= ;").unwrap();
        assert_eq!(g.rules(), g2.rules());
    }

    #[test]
    fn lexset_items() {
        let g = parse_grammar("start S; S ::= \"[s] \" @entities \" [r] \" @relations;").unwrap();
        let rhs = &g.rules()[0].rhs;
        assert_eq!(rhs.len(), 4);
        assert_eq!(rhs[1], RhsItem::LexSet("entities".into()));
        assert_eq!(rhs[3], RhsItem::LexSet("relations".into()));
        let again = parse_grammar(&g.to_dsl()).unwrap();
        assert_eq!(again, g);
    }

    #[test]
    fn escapes() {
        let g = parse_grammar(r#"S ::= "q\"b\\n\n\x00\xff";"#).unwrap();
        assert_eq!(
            g.rules()[0].rhs[0],
            RhsItem::Terminal(b"q\"b\\n\n\x00\xff".to_vec())
        );
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(
            parse_grammar("S ::= \"a\\t\";"),
            Err(ParseError::UnknownEscape {
                line: 1,
                column: 9,
                escape: 't'
            })
        );
        assert!(matches!(
            parse_grammar("start S;\nstart T;\nS ::= \"a\";"),
            Err(ParseError::DuplicateStart { line: 2, column: 1 })
        ));
        match parse_grammar("S ::= \"a\"\n  | ?") {
            Err(ParseError::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 5)),
            other => panic!("{other:?}"),
        }
        assert_eq!(parse_grammar("  # nothing\n"), Err(ParseError::Empty));
    }

    fn arb_item(nts: usize) -> impl Strategy<Value = RhsItem> {
        prop_oneof![
            proptest::collection::vec(any::<u8>(), 0..5).prop_map(RhsItem::Terminal),
            (0..nts as u32).prop_map(|i| RhsItem::Nonterminal(SymbolId(i))),
            "[a-z]{1,4}".prop_map(RhsItem::LexSet),
        ]
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(
            rules in proptest::collection::vec(
                (0..4usize, proptest::collection::vec(arb_item(4), 0..4)), 1..10)
        ) {
            let mut b = GrammarBuilder::new();
            let ids: Vec<SymbolId> = (0..4).map(|i| b.symbol(&format!("N{i}"))).collect();
            for (lhs, rhs) in rules {
                b.rule(ids[lhs], rhs);
            }
            let g = b.build(ids[0]);
            let reparsed = parse_grammar(&g.to_dsl()).unwrap();
            // unused symbols are not printed, so compare through a second print
            prop_assert_eq!(reparsed.to_dsl(), g.to_dsl());
            prop_assert_eq!(parse_grammar(&reparsed.to_dsl()).unwrap(), reparsed);
        }
    }
}
