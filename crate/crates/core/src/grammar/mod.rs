//! Character-level (byte-level) context-free grammars.
//!
//! A [`Grammar`] is a set of rules over nonterminals, byte-string terminals
//! and lexical sets. A lexical set (`@name` in the DSL) matches any entry of a
//! bound [`Catalog`] and stands in for what would otherwise be an alternation
//! with one rule per entry.

mod dsl;
mod validate;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub use dsl::{parse_grammar, ParseError};
pub use validate::{validate, Diagnostic};

use crate::catalog::Catalog;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(pub u32);

impl SymbolId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RhsItem {
    /// Literal bytes; the empty terminal is ε.
    Terminal(Vec<u8>),
    Nonterminal(SymbolId),
    /// Reference to a catalog bound under this name.
    LexSet(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub lhs: SymbolId,
    /// Never empty: ε is a single zero-length terminal.
    pub rhs: Vec<RhsItem>,
}

#[derive(Clone)]
pub struct Grammar {
    names: Vec<String>,
    start: SymbolId,
    rules: Vec<Rule>,
    catalogs: BTreeMap<String, Arc<Catalog>>,
}

impl Grammar {
    pub fn start(&self) -> SymbolId {
        self.start
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn nonterminal_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, id: SymbolId) -> &str {
        &self.names[id.index()]
    }

    pub fn symbol(&self, name: &str) -> Option<SymbolId> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| SymbolId(i as u32))
    }

    pub fn rules_for(&self, lhs: SymbolId) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(move |r| r.lhs == lhs)
    }

    /// Lexset names referenced anywhere, sorted and deduplicated.
    pub fn lexset_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self
            .rules
            .iter()
            .flat_map(|r| r.rhs.iter())
            .filter_map(|item| match item {
                RhsItem::LexSet(n) => Some(n.as_str()),
                _ => None,
            })
            .collect();
        names.sort_unstable();
        names.dedup();
        names
    }

    pub fn bind_catalog(&mut self, name: impl Into<String>, catalog: Arc<Catalog>) {
        self.catalogs.insert(name.into(), catalog);
    }

    pub fn with_catalog(mut self, name: impl Into<String>, catalog: Arc<Catalog>) -> Self {
        self.bind_catalog(name, catalog);
        self
    }

    pub fn catalog(&self, name: &str) -> Option<&Arc<Catalog>> {
        self.catalogs.get(name)
    }

    pub fn catalogs(&self) -> &BTreeMap<String, Arc<Catalog>> {
        &self.catalogs
    }

    /// Renders the grammar in DSL syntax. Reparsing the output yields a
    /// structurally identical grammar (catalog bindings are not printed).
    pub fn to_dsl(&self) -> String {
        dsl::print(self)
    }

    /// Drops rules that cannot derive a terminal string (including those
    /// referencing undefined nonterminals) and nonterminals unreachable from
    /// the start symbol. Unbound lexsets count as productive; lexsets bound
    /// to empty catalogs do not.
    pub fn prune(&self) -> Grammar {
        let productive = validate::productive(self, false, |name| {
            self.catalogs.get(name).is_none_or(|c| !c.is_empty())
        });
        let live: Vec<&Rule> = self
            .rules
            .iter()
            .filter(|r| productive[r.lhs.index()] && rule_is_productive(r, &productive, self))
            .collect();
        let mut reachable = vec![false; self.names.len()];
        let mut stack = vec![self.start];
        reachable[self.start.index()] = true;
        while let Some(sym) = stack.pop() {
            for rule in live.iter().filter(|r| r.lhs == sym) {
                for item in &rule.rhs {
                    if let RhsItem::Nonterminal(n) = item {
                        if !reachable[n.index()] {
                            reachable[n.index()] = true;
                            stack.push(*n);
                        }
                    }
                }
            }
        }
        let mut builder = GrammarBuilder::new();
        builder.symbol(self.name(self.start));
        for rule in live.into_iter().filter(|r| reachable[r.lhs.index()]) {
            let lhs = builder.symbol(self.name(rule.lhs));
            let rhs = rule
                .rhs
                .iter()
                .map(|item| match item {
                    RhsItem::Nonterminal(n) => RhsItem::Nonterminal(builder.symbol(self.name(*n))),
                    other => other.clone(),
                })
                .collect();
            builder.rule(lhs, rhs);
        }
        let start = builder.symbol(self.name(self.start));
        let mut g = builder.build(start);
        g.catalogs = self.catalogs.clone();
        g
    }
}

fn rule_is_productive(rule: &Rule, productive: &[bool], g: &Grammar) -> bool {
    rule.rhs.iter().all(|item| match item {
        RhsItem::Terminal(_) => true,
        RhsItem::Nonterminal(n) => productive[n.index()],
        RhsItem::LexSet(name) => g.catalogs.get(name).is_none_or(|c| !c.is_empty()),
    })
}

impl PartialEq for Grammar {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
            && self.start == other.start
            && self.rules == other.rules
            && self.catalogs.keys().eq(other.catalogs.keys())
    }
}

impl fmt::Debug for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grammar")
            .field("start", &self.name(self.start))
            .field("nonterminals", &self.names.len())
            .field("rules", &self.rules.len())
            .field("catalogs", &self.catalogs.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_dsl())
    }
}

/// Programmatic grammar construction. Names are interned in first-use
/// order, which is also the order the DSL parser assigns ids in.
#[derive(Debug, Default, Clone)]
pub struct GrammarBuilder {
    names: Vec<String>,
    index: BTreeMap<String, SymbolId>,
    rules: Vec<Rule>,
}

impl GrammarBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn symbol(&mut self, name: &str) -> SymbolId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = SymbolId(self.names.len() as u32);
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        id
    }

    /// Adds `lhs ::= rhs`; an empty `rhs` is stored as ε.
    pub fn rule(&mut self, lhs: SymbolId, mut rhs: Vec<RhsItem>) -> &mut Self {
        if rhs.is_empty() {
            rhs.push(RhsItem::Terminal(Vec::new()));
        }
        self.rules.push(Rule { lhs, rhs });
        self
    }

    pub fn build(self, start: SymbolId) -> Grammar {
        Grammar {
            names: self.names,
            start,
            rules: self.rules,
            catalogs: BTreeMap::new(),
        }
    }
}

/// Shorthand constructors for rule items.
pub fn t(bytes: impl AsRef<[u8]>) -> RhsItem {
    RhsItem::Terminal(bytes.as_ref().to_vec())
}

pub fn nt(id: SymbolId) -> RhsItem {
    RhsItem::Nonterminal(id)
}

pub fn lex(name: &str) -> RhsItem {
    RhsItem::LexSet(name.to_owned())
}
