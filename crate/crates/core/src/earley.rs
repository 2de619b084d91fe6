//! Incremental Earley recognition.
//!
//! The recognizer is generic over the terminal alphabet: byte grammars use
//! `u8` terminals, token-level grammars use token ids. Lexical sets are not
//! predicted as rules; a trie cursor walks the catalog instead, and reaching
//! an accepting node completes the lexset like any other symbol.
//!
//! A [`State`] is a handle on the newest Earley set. Each item points at its
//! origin set through an [`Arc`], so older sets live exactly as long as some
//! item still needs them for completion, and forked states share their
//! common history. Advancing never mutates an existing set.
//!
//! Empty derivations use nullable precomputation: predicting a nullable
//! nonterminal also moves the dot past it.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use rustc_hash::FxHashSet;
use thiserror::Error;

use crate::grammar::{validate, Diagnostic, Grammar, RhsItem};
use crate::trie::{NodeId, Trie};

pub trait Terminal: Copy + Ord + Hash + fmt::Debug + Send + Sync + 'static {}
impl<T: Copy + Ord + Hash + fmt::Debug + Send + Sync + 'static> Terminal for T {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol<T> {
    Terminal(T),
    Nonterminal(u32),
    LexSet(u32),
}

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("grammar is invalid: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
}

#[derive(Debug, Clone)]
struct CompiledRule<T> {
    lhs: u32,
    rhs: Box<[Symbol<T>]>,
}

/// A grammar lowered to single-terminal symbols, ready for recognition.
pub struct CompiledGrammar<T> {
    rules: Vec<CompiledRule<T>>,
    by_lhs: Vec<Vec<u32>>,
    nullable: Vec<bool>,
    lexsets: Vec<Arc<Trie<T>>>,
    start: u32,
}

/// Byte-level compiled grammar.
pub type Recognizer = CompiledGrammar<u8>;
/// Byte-level parser state.
pub type ParserState = State<u8>;

impl<T: Terminal> CompiledGrammar<T> {
    /// `rules` are `(lhs, rhs)` pairs over nonterminals `0..nonterminals`;
    /// lexset `i` is matched by `lexsets[i]`. The caller guarantees that
    /// every nonterminal is productive and every lexset trie is non-empty.
    pub fn from_parts(
        nonterminals: usize,
        start: u32,
        rules: Vec<(u32, Vec<Symbol<T>>)>,
        lexsets: Vec<Arc<Trie<T>>>,
    ) -> Arc<Self> {
        let rules: Vec<CompiledRule<T>> = rules
            .into_iter()
            .map(|(lhs, rhs)| CompiledRule {
                lhs,
                rhs: rhs.into_boxed_slice(),
            })
            .collect();
        let mut by_lhs = vec![Vec::new(); nonterminals];
        for (i, r) in rules.iter().enumerate() {
            by_lhs[r.lhs as usize].push(i as u32);
        }
        let mut nullable = vec![false; nonterminals];
        loop {
            let mut changed = false;
            for r in &rules {
                if nullable[r.lhs as usize] {
                    continue;
                }
                if r.rhs
                    .iter()
                    .all(|s| matches!(s, Symbol::Nonterminal(n) if nullable[*n as usize]))
                {
                    nullable[r.lhs as usize] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        Arc::new(CompiledGrammar {
            rules,
            by_lhs,
            nullable,
            lexsets,
            start,
        })
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn is_nullable(&self, nonterminal: u32) -> bool {
        self.nullable[nonterminal as usize]
    }

    pub fn initial_state(self: &Arc<Self>) -> State<T> {
        State::new(self)
    }
}

impl CompiledGrammar<u8> {
    /// Validates and lowers a byte grammar. Multi-byte terminals become
    /// byte sequences and ε terminals disappear.
    pub fn compile(grammar: &Grammar) -> Result<Arc<Self>, CompileError> {
        let diagnostics = validate(grammar);
        if !diagnostics.is_empty() {
            return Err(CompileError::Invalid(diagnostics));
        }
        let names = grammar.lexset_names();
        let lexsets = names
            .iter()
            .map(|n| grammar.catalog(n).expect("validated").trie().clone())
            .collect();
        let rules = grammar
            .rules()
            .iter()
            .map(|r| {
                let mut rhs = Vec::new();
                for item in &r.rhs {
                    match item {
                        RhsItem::Terminal(bytes) => {
                            rhs.extend(bytes.iter().map(|&b| Symbol::Terminal(b)))
                        }
                        RhsItem::Nonterminal(id) => rhs.push(Symbol::Nonterminal(id.0)),
                        RhsItem::LexSet(name) => {
                            let idx = names.binary_search(&name.as_str()).expect("collected");
                            rhs.push(Symbol::LexSet(idx as u32));
                        }
                    }
                }
                (r.lhs.0, rhs)
            })
            .collect();
        Ok(Self::from_parts(
            grammar.nonterminal_count(),
            grammar.start().0,
            rules,
            lexsets,
        ))
    }
}

impl<T> fmt::Debug for CompiledGrammar<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompiledGrammar")
            .field("rules", &self.rules.len())
            .field("nonterminals", &self.by_lhs.len())
            .field("lexsets", &self.lexsets.len())
            .finish()
    }
}

type Link<T> = Option<Arc<EarleySet<T>>>;

struct Item<T> {
    rule: u32,
    dot: u32,
    /// `None` means the set that holds the item.
    origin: Link<T>,
}

struct Cursor<T> {
    lexset: u32,
    node: NodeId,
    /// `None` means the set that holds the cursor.
    start: Link<T>,
}

struct EarleySet<T> {
    pos: u32,
    /// Only items with a symbol after the dot are kept.
    items: Vec<Item<T>>,
    /// `(symbol key, item index)` for items waiting on a nonterminal or lexset.
    waiting: Vec<(u32, u32)>,
    /// `(terminal, item index)` for items waiting on a terminal.
    scans: Vec<(T, u32)>,
    cursors: Vec<Cursor<T>>,
    complete: bool,
    fingerprint: OnceLock<u64>,
}

fn nt_key(n: u32) -> u32 {
    n << 1
}

fn lex_key(l: u32) -> u32 {
    l << 1 | 1
}

impl<T> EarleySet<T> {
    fn waiting_on(&self, key: u32) -> impl Iterator<Item = &Item<T>> {
        let lo = self.waiting.partition_point(|&(k, _)| k < key);
        self.waiting[lo..]
            .iter()
            .take_while(move |&&(k, _)| k == key)
            .map(move |&(_, idx)| &self.items[idx as usize])
    }

    fn take_links(&mut self) -> Vec<Arc<EarleySet<T>>> {
        let mut out = Vec::new();
        for item in &mut self.items {
            out.extend(item.origin.take());
        }
        for c in &mut self.cursors {
            out.extend(c.start.take());
        }
        out
    }
}

impl<T> Drop for EarleySet<T> {
    // Unlink iteratively; long charts would otherwise recurse once per set.
    fn drop(&mut self) {
        let mut stack = self.take_links();
        while let Some(link) = stack.pop() {
            if let Ok(mut inner) = Arc::try_unwrap(link) {
                stack.extend(inner.take_links());
            }
        }
    }
}

fn resolve<T>(link: &Link<T>, holder: &Arc<EarleySet<T>>) -> Arc<EarleySet<T>> {
    link.clone().unwrap_or_else(|| holder.clone())
}

/// Sets up to this size are deduplicated by linear scan.
const SMALL_SET: usize = 32;

struct SetBuilder<'g, T> {
    g: &'g CompiledGrammar<T>,
    pos: u32,
    items: Vec<Item<T>>,
    /// Keys of `items`, once there are more than [`SMALL_SET`].
    seen: Option<FxHashSet<(u32, u32, u32)>>,
    cursors: Vec<Cursor<T>>,
    cursor_seen: Option<FxHashSet<(u32, NodeId, u32)>>,
    complete: bool,
}

impl<'g, T: Terminal> SetBuilder<'g, T> {
    fn new(g: &'g CompiledGrammar<T>, pos: u32) -> Self {
        SetBuilder {
            g,
            pos,
            items: Vec::new(),
            seen: None,
            cursors: Vec::new(),
            cursor_seen: None,
            complete: false,
        }
    }

    fn link_pos(&self, link: &Link<T>) -> u32 {
        link.as_ref().map_or(self.pos, |o| o.pos)
    }

    fn add_item(&mut self, rule: u32, dot: u32, origin: Link<T>) {
        let key = (rule, dot, self.link_pos(&origin));
        let fresh = match &mut self.seen {
            Some(seen) => seen.insert(key),
            None => {
                let fresh = !self
                    .items
                    .iter()
                    .any(|it| (it.rule, it.dot, self.link_pos(&it.origin)) == key);
                if fresh && self.items.len() == SMALL_SET {
                    let mut seen: FxHashSet<_> = self
                        .items
                        .iter()
                        .map(|it| (it.rule, it.dot, self.link_pos(&it.origin)))
                        .collect();
                    seen.insert(key);
                    self.seen = Some(seen);
                }
                fresh
            }
        };
        if fresh {
            self.items.push(Item { rule, dot, origin });
        }
    }

    fn add_cursor(&mut self, lexset: u32, node: NodeId, start: Link<T>) {
        let key = (lexset, node, self.link_pos(&start));
        let fresh = match &mut self.cursor_seen {
            Some(seen) => seen.insert(key),
            None => {
                let fresh = !self
                    .cursors
                    .iter()
                    .any(|c| (c.lexset, c.node, self.link_pos(&c.start)) == key);
                if fresh && self.cursors.len() == SMALL_SET {
                    let mut seen: FxHashSet<_> = self
                        .cursors
                        .iter()
                        .map(|c| (c.lexset, c.node, self.link_pos(&c.start)))
                        .collect();
                    seen.insert(key);
                    self.cursor_seen = Some(seen);
                }
                fresh
            }
        };
        if fresh {
            self.cursors.push(Cursor {
                lexset,
                node,
                start,
            });
        }
    }

    /// Completes `key` for every item of `from` waiting on it.
    fn complete_from(&mut self, from: &Arc<EarleySet<T>>, key: u32) {
        for parent in from.waiting_on(key) {
            let origin = resolve(&parent.origin, from);
            self.add_item(parent.rule, parent.dot + 1, Some(origin));
        }
    }

    fn close(&mut self) {
        let g = self.g;
        let mut next = 0;
        while next < self.items.len() {
            let (rule_idx, dot) = (self.items[next].rule, self.items[next].dot);
            let origin = self.items[next].origin.clone();
            next += 1;
            let rule = &g.rules[rule_idx as usize];
            match rule.rhs.get(dot as usize) {
                None => {
                    let origin_pos = origin.as_ref().map_or(self.pos, |o| o.pos);
                    if rule.lhs == g.start && origin_pos == 0 {
                        self.complete = true;
                    }
                    // Empty completions are covered by the nullable shortcut.
                    if let Some(o) = origin {
                        self.complete_from(&o, nt_key(rule.lhs));
                    }
                }
                Some(Symbol::Nonterminal(b)) => {
                    for &r in &g.by_lhs[*b as usize] {
                        self.add_item(r, 0, None);
                    }
                    if g.nullable[*b as usize] {
                        self.add_item(rule_idx, dot + 1, origin);
                    }
                }
                Some(Symbol::LexSet(l)) => self.add_cursor(*l, Trie::<T>::ROOT, None),
                Some(Symbol::Terminal(_)) => {}
            }
        }
    }

    fn finish(self) -> EarleySet<T> {
        let g = self.g;
        let mut items = self.items;
        items.retain(|item| (item.dot as usize) < g.rules[item.rule as usize].rhs.len());
        let mut waiting = Vec::new();
        let mut scans = Vec::new();
        for (idx, item) in items.iter().enumerate() {
            let idx = idx as u32;
            match g.rules[item.rule as usize].rhs[item.dot as usize] {
                Symbol::Terminal(t) => scans.push((t, idx)),
                Symbol::Nonterminal(n) => waiting.push((nt_key(n), idx)),
                Symbol::LexSet(l) => waiting.push((lex_key(l), idx)),
            }
        }
        waiting.sort_unstable();
        scans.sort_unstable();
        EarleySet {
            pos: self.pos,
            items,
            waiting,
            scans,
            cursors: self.cursors,
            complete: self.complete,
            fingerprint: OnceLock::new(),
        }
    }
}

/// Immutable recognizer state after consuming some prefix.
pub struct State<T> {
    grammar: Arc<CompiledGrammar<T>>,
    set: Arc<EarleySet<T>>,
}

impl<T> Clone for State<T> {
    fn clone(&self) -> Self {
        State {
            grammar: self.grammar.clone(),
            set: self.set.clone(),
        }
    }
}

impl<T: Terminal> State<T> {
    pub fn new(grammar: &Arc<CompiledGrammar<T>>) -> Self {
        let mut b = SetBuilder::new(grammar, 0);
        for &r in &grammar.by_lhs[grammar.start as usize] {
            b.add_item(r, 0, None);
        }
        b.close();
        State {
            grammar: grammar.clone(),
            set: Arc::new(b.finish()),
        }
    }

    pub fn grammar(&self) -> &Arc<CompiledGrammar<T>> {
        &self.grammar
    }

    /// Number of terminals consumed so far.
    pub fn consumed(&self) -> usize {
        self.set.pos as usize
    }

    pub fn is_viable(&self) -> bool {
        !self.set.items.is_empty() || !self.set.cursors.is_empty() || self.set.complete
    }

    /// The consumed prefix is itself a member of the language.
    pub fn is_complete(&self) -> bool {
        self.set.complete
    }

    /// Whether `t` extends the prefix to another viable prefix.
    pub fn accepts(&self, t: T) -> bool {
        let set = &*self.set;
        let lo = set.scans.partition_point(|&(k, _)| k < t);
        if set.scans.get(lo).is_some_and(|&(k, _)| k == t) {
            return true;
        }
        set.cursors.iter().any(|c| {
            self.grammar.lexsets[c.lexset as usize]
                .child(c.node, t)
                .is_some()
        })
    }

    /// Consumes one terminal. Rejection yields a non-viable state; `self` is
    /// unchanged either way.
    pub fn advance(&self, t: T) -> State<T> {
        let g = &*self.grammar;
        let prev = &self.set;
        let mut b = SetBuilder::new(g, prev.pos + 1);
        let lo = prev.scans.partition_point(|&(k, _)| k < t);
        for &(_, idx) in prev.scans[lo..].iter().take_while(|&&(k, _)| k == t) {
            let item = &prev.items[idx as usize];
            b.add_item(item.rule, item.dot + 1, Some(resolve(&item.origin, prev)));
        }
        for c in &prev.cursors {
            let trie = &g.lexsets[c.lexset as usize];
            let Some(child) = trie.child(c.node, t) else {
                continue;
            };
            let start = resolve(&c.start, prev);
            if trie.is_accepting(child) {
                b.complete_from(&start, lex_key(c.lexset));
            }
            if trie.has_children(child) {
                b.add_cursor(c.lexset, child, Some(start));
            }
        }
        b.close();
        State {
            grammar: self.grammar.clone(),
            set: Arc::new(b.finish()),
        }
    }

    pub fn try_advance(&self, t: T) -> Option<State<T>> {
        self.accepts(t).then(|| self.advance(t))
    }

    pub fn advance_all(&self, ts: &[T]) -> State<T> {
        let mut s = self.clone();
        for &t in ts {
            s = s.advance(t);
        }
        s
    }

    /// Calls `f` once per admissible next terminal (possibly with repeats).
    pub fn for_each_next(&self, mut f: impl FnMut(T)) {
        for &(t, _) in &self.set.scans {
            f(t);
        }
        for c in &self.set.cursors {
            for (k, _) in self.grammar.lexsets[c.lexset as usize].children(c.node) {
                f(k);
            }
        }
    }

    /// Sorted, deduplicated admissible next terminals.
    pub fn next_terminals(&self) -> Vec<T> {
        let mut out = Vec::new();
        self.for_each_next(|t| out.push(t));
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Structural hash of the state's future behaviour: items, cursors and,
    /// recursively, the sets they will complete into. Independent of the
    /// absolute position.
    pub fn fingerprint(&self) -> u64 {
        fingerprint(&self.set)
    }
}

fn fingerprint<T: Terminal>(root: &Arc<EarleySet<T>>) -> u64 {
    if let Some(&fp) = root.fingerprint.get() {
        return fp;
    }
    // post-order over links that still need hashes
    let mut stack: Vec<(Arc<EarleySet<T>>, bool)> = vec![(root.clone(), false)];
    while let Some((set, expanded)) = stack.pop() {
        if set.fingerprint.get().is_some() {
            continue;
        }
        let links = set
            .items
            .iter()
            .filter_map(|i| i.origin.as_ref())
            .chain(set.cursors.iter().filter_map(|c| c.start.as_ref()));
        if !expanded {
            stack.push((set.clone(), true));
            for link in links {
                if link.fingerprint.get().is_none() {
                    stack.push((link.clone(), false));
                }
            }
            continue;
        }
        let link_fp = |l: &Link<T>| {
            l.as_ref()
                .map_or(0, |s| *s.fingerprint.get().expect("ordered"))
        };
        let mut items: Vec<(u32, u32, u64)> = set
            .items
            .iter()
            .map(|i| (i.rule, i.dot, link_fp(&i.origin)))
            .collect();
        items.sort_unstable();
        let mut cursors: Vec<(u32, NodeId, u64)> = set
            .cursors
            .iter()
            .map(|c| (c.lexset, c.node, link_fp(&c.start)))
            .collect();
        cursors.sort_unstable();
        let mut h = DefaultHasher::new();
        items.hash(&mut h);
        cursors.hash(&mut h);
        set.complete.hash(&mut h);
        let _ = set.fingerprint.set(h.finish() | 1);
    }
    *root.fingerprint.get().expect("computed")
}

impl<T: Terminal> PartialEq for State<T> {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grammar, &other.grammar)
            && self.consumed() == other.consumed()
            && self.fingerprint() == other.fingerprint()
    }
}

impl<T: Terminal> fmt::Debug for State<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("State")
            .field("consumed", &self.set.pos)
            .field("items", &self.set.items.len())
            .field("cursors", &self.set.cursors.len())
            .field("complete", &self.set.complete)
            .finish()
    }
}

/// A set of byte values.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ByteSet([u64; 4]);

impl ByteSet {
    pub fn insert(&mut self, b: u8) {
        self.0[(b >> 6) as usize] |= 1 << (b & 63);
    }

    pub fn contains(&self, b: u8) -> bool {
        self.0[(b >> 6) as usize] & (1 << (b & 63)) != 0
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        (0..=255u8).filter(move |&b| self.contains(b))
    }
}

impl FromIterator<u8> for ByteSet {
    fn from_iter<I: IntoIterator<Item = u8>>(iter: I) -> Self {
        let mut s = ByteSet::default();
        for b in iter {
            s.insert(b);
        }
        s
    }
}

impl fmt::Debug for ByteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set()
            .entries(self.iter().map(|b| b as char))
            .finish()
    }
}

impl State<u8> {
    /// Bytes `b` for which `advance(b)` stays viable.
    pub fn allowed_bytes(&self) -> ByteSet {
        let mut s = ByteSet::default();
        self.for_each_next(|b| s.insert(b));
        s
    }

    pub fn advance_bytes(&self, bytes: &[u8]) -> State<u8> {
        self.advance_all(bytes)
    }
}
