use std::fmt;

use super::{Grammar, RhsItem};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Diagnostic {
    UndefinedNonterminal(String),
    UnreachableNonterminal(String),
    /// No derivation of this nonterminal terminates (e.g. `S ::= S`).
    NonTerminating(String),
    UnboundLexSet(String),
    EmptyCatalog(String),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::UndefinedNonterminal(n) => write!(f, "undefined nonterminal {n}"),
            Diagnostic::UnreachableNonterminal(n) => write!(f, "unreachable nonterminal {n}"),
            Diagnostic::NonTerminating(n) => {
                write!(f, "nonterminal {n} has no terminating derivation")
            }
            Diagnostic::UnboundLexSet(n) => write!(f, "lexset @{n} is not bound to a catalog"),
            Diagnostic::EmptyCatalog(n) => write!(f, "lexset @{n} is bound to an empty catalog"),
        }
    }
}

/// Checks every grammar invariant and returns one diagnostic per violation,
/// sorted. An empty result means the grammar can be compiled.
pub fn validate(g: &Grammar) -> Vec<Diagnostic> {
    let n = g.nonterminal_count();
    let mut defined = vec![false; n];
    for r in g.rules() {
        defined[r.lhs.index()] = true;
    }

    let mut out = Vec::new();
    let mut used = vec![false; n];
    used[g.start().index()] = true;
    for item in g.rules().iter().flat_map(|r| r.rhs.iter()) {
        if let RhsItem::Nonterminal(id) = item {
            used[id.index()] = true;
        }
    }
    for i in 0..n {
        if used[i] && !defined[i] {
            out.push(Diagnostic::UndefinedNonterminal(g.names[i].clone()));
        }
    }

    let mut reachable = vec![false; n];
    let mut stack = vec![g.start()];
    reachable[g.start().index()] = true;
    while let Some(sym) = stack.pop() {
        for r in g.rules_for(sym) {
            for item in &r.rhs {
                if let RhsItem::Nonterminal(id) = item {
                    if !reachable[id.index()] {
                        reachable[id.index()] = true;
                        stack.push(*id);
                    }
                }
            }
        }
    }
    for i in 0..n {
        if defined[i] && !reachable[i] {
            out.push(Diagnostic::UnreachableNonterminal(g.names[i].clone()));
        }
    }

    for name in g.lexset_names() {
        match g.catalog(name) {
            None => out.push(Diagnostic::UnboundLexSet(name.to_owned())),
            Some(c) if c.is_empty() => out.push(Diagnostic::EmptyCatalog(name.to_owned())),
            Some(_) => {}
        }
    }

    // Undefined symbols and lexset problems are already reported; treat them
    // as productive so they do not cascade.
    let productive = productive(g, true, |_| true);
    for i in 0..n {
        if defined[i] && !productive[i] {
            out.push(Diagnostic::NonTerminating(g.names[i].clone()));
        }
    }
    out.sort();
    out
}

/// Least fixpoint of "derives some terminal string". `undefined_ok` decides
/// nonterminals without rules; `lexset_ok` decides lexsets.
pub(super) fn productive(
    g: &Grammar,
    undefined_ok: bool,
    lexset_ok: impl Fn(&str) -> bool,
) -> Vec<bool> {
    let n = g.nonterminal_count();
    let mut defined = vec![false; n];
    for r in g.rules() {
        defined[r.lhs.index()] = true;
    }
    let mut productive: Vec<bool> = defined.iter().map(|d| !d && undefined_ok).collect();
    loop {
        let mut changed = false;
        for r in g.rules() {
            if productive[r.lhs.index()] {
                continue;
            }
            let ok = r.rhs.iter().all(|item| match item {
                RhsItem::Terminal(_) => true,
                RhsItem::Nonterminal(id) => productive[id.index()],
                RhsItem::LexSet(name) => lexset_ok(name),
            });
            if ok {
                productive[r.lhs.index()] = true;
                changed = true;
            }
        }
        if !changed {
            return productive;
        }
    }
}
