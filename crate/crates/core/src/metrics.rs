//! Task metrics and the parsers that turn decoded strings back into
//! structures.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::templates::{trim, CieMarkers};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("{pred} predictions for {gold} gold items")]
    LengthMismatch { pred: usize, gold: usize },
    #[error("accuracy of an empty list is undefined")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prf {
    #[serde(rename = "p")]
    pub precision: f64,
    #[serde(rename = "r")]
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    /// Ratios from raw counts; 0/0 is 1 only when both sides are empty.
    pub fn from_counts(tp: usize, pred: usize, gold: usize) -> Self {
        let both_empty = pred == 0 && gold == 0;
        let ratio = |num: usize, den: usize| {
            if den > 0 {
                num as f64 / den as f64
            } else if both_empty {
                1.0
            } else {
                0.0
            }
        };
        let precision = ratio(tp, pred);
        let recall = ratio(tp, gold);
        Prf {
            precision,
            recall,
            f1: f1(precision, recall),
        }
    }
}

/// Harmonic mean, 0 when both inputs are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

// ---------------------------------------------------------------- cIE

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triplet {
    pub subject: Vec<u8>,
    pub relation: Vec<u8>,
    pub object: Vec<u8>,
}

impl Triplet {
    pub fn new(s: impl Into<Vec<u8>>, r: impl Into<Vec<u8>>, o: impl Into<Vec<u8>>) -> Self {
        Triplet {
            subject: s.into(),
            relation: r.into(),
            object: o.into(),
        }
    }
}

pub type TripletSet = BTreeSet<Triplet>;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("malformed triplet string at offset {offset}: {message}")]
pub struct TripletParseError {
    pub offset: usize,
    pub message: String,
}

fn find(hay: &[u8], needle: &[u8], from: usize) -> Option<usize> {
    hay.get(from..)?
        .windows(needle.len())
        .position(|w| w == needle)
        .map(|p| p + from)
}

/// Inverse of [`linearize_triplets`]. Whitespace around markers and slots is
/// ignored, so slot values must not start or end with whitespace.
pub fn parse_triplets(text: &[u8], markers: &CieMarkers) -> Result<TripletSet, TripletParseError> {
    let [sm, rm, om] = markers.cores();
    let err = |offset: usize, message: String| TripletParseError { offset, message };
    let next_marker = |from: usize| -> Option<(usize, usize)> {
        [sm, rm, om]
            .iter()
            .enumerate()
            .filter_map(|(k, m)| find(text, m, from).map(|p| (p, k)))
            .min()
    };
    let name = |k: usize| String::from_utf8_lossy([sm, rm, om][k]).into_owned();
    let slot = |a: usize, b: usize, what: &str| -> Result<Vec<u8>, TripletParseError> {
        let v = trim(&text[a..b]);
        if v.is_empty() {
            Err(err(a, format!("empty {what}")))
        } else {
            Ok(v.to_vec())
        }
    };

    let mut out = TripletSet::new();
    let mut pos = 0;
    loop {
        while pos < text.len() && text[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos == text.len() {
            return Ok(out);
        }
        if !text[pos..].starts_with(sm) {
            return Err(err(pos, format!("expected {:?}", name(0))));
        }
        let s_start = pos + sm.len();
        let expect = |k: usize, from: usize| -> Result<usize, TripletParseError> {
            match next_marker(from) {
                Some((p, found)) if found == k => Ok(p),
                Some((p, found)) => Err(err(
                    p,
                    format!("expected {:?}, found {:?}", name(k), name(found)),
                )),
                None => Err(err(text.len(), format!("expected {:?}", name(k)))),
            }
        };
        let r_at = expect(1, s_start)?;
        let o_at = expect(2, r_at + rm.len())?;
        let o_start = o_at + om.len();
        let end = match next_marker(o_start) {
            Some((p, 0)) => p,
            Some((p, found)) => {
                return Err(err(
                    p,
                    format!("expected {:?}, found {:?}", name(0), name(found)),
                ))
            }
            None => text.len(),
        };
        out.insert(Triplet {
            subject: slot(s_start, r_at, "subject")?,
            relation: slot(r_at + rm.len(), o_at, "relation")?,
            object: slot(o_start, end, "object")?,
        });
        pos = end;
    }
}

/// Renders a set in its canonical order with the schema's exact markers.
pub fn linearize_triplets<'a>(
    triplets: impl IntoIterator<Item = &'a Triplet>,
    markers: &CieMarkers,
) -> Vec<u8> {
    let mut out = Vec::new();
    for (i, t) in triplets.into_iter().enumerate() {
        if i > 0 {
            out.extend_from_slice(&markers.separator);
        }
        out.extend_from_slice(&markers.subject);
        out.extend_from_slice(&t.subject);
        out.extend_from_slice(&markers.relation);
        out.extend_from_slice(&t.relation);
        out.extend_from_slice(&markers.object);
        out.extend_from_slice(&t.object);
    }
    out
}

/// Corpus-level micro precision, recall and F1 over triplet sets. A 0/0
/// ratio is 1 when the corpus has neither predictions nor gold triplets and
/// 0 otherwise.
pub fn cie_prf(pred: &[TripletSet], gold: &[TripletSet]) -> Result<Prf, MetricError> {
    if pred.len() != gold.len() {
        return Err(MetricError::LengthMismatch {
            pred: pred.len(),
            gold: gold.len(),
        });
    }
    let (mut tp, mut np, mut ng) = (0, 0, 0);
    for (p, g) in pred.iter().zip(gold) {
        tp += p.intersection(g).count();
        np += p.len();
        ng += g.len();
    }
    Ok(Prf::from_counts(tp, np, ng))
}

// ----------------------------------------------------------------- ED

pub fn ed_accuracy<P: AsRef<[u8]>, G: AsRef<[u8]>>(
    pred: &[P],
    gold: &[G],
) -> Result<f64, MetricError> {
    if pred.len() != gold.len() {
        return Err(MetricError::LengthMismatch {
            pred: pred.len(),
            gold: gold.len(),
        });
    }
    if pred.is_empty() {
        return Err(MetricError::Empty);
    }
    let hits = pred
        .iter()
        .zip(gold)
        .filter(|(p, g)| p.as_ref() == g.as_ref())
        .count();
    Ok(hits as f64 / pred.len() as f64)
}

// ----------------------------------------------------------------- CP

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BracketTree {
    Leaf(Vec<u8>),
    Node {
        label: Vec<u8>,
        children: Vec<BracketTree>,
    },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeParseError {
    #[error("unbalanced brackets at offset {offset}")]
    Unbalanced { offset: usize },
    #[error("missing label after bracket at offset {offset}")]
    MissingLabel { offset: usize },
    #[error("node at offset {offset} has no children")]
    EmptyNode { offset: usize },
    #[error("expected a single bracketed tree (offset {offset})")]
    NotATree { offset: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok<'a> {
    Open(u8),
    Close(u8),
    Word(&'a [u8]),
}

fn is_bracket(b: u8) -> bool {
    matches!(b, b'[' | b']' | b'(' | b')')
}

fn lex_brackets(s: &[u8]) -> Vec<(usize, Tok<'_>)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < s.len() {
        let b = s[i];
        if b.is_ascii_whitespace() {
            i += 1;
        } else if b == b'[' || b == b'(' {
            out.push((i, Tok::Open(b)));
            i += 1;
        } else if b == b']' || b == b')' {
            out.push((i, Tok::Close(b)));
            i += 1;
        } else {
            let start = i;
            while i < s.len() && !s[i].is_ascii_whitespace() && !is_bracket(s[i]) {
                i += 1;
            }
            out.push((start, Tok::Word(&s[start..i])));
        }
    }
    out
}

fn closer(open: u8) -> u8 {
    if open == b'[' {
        b']'
    } else {
        b')'
    }
}

/// Parses `[S [NP a][VP b]]` or `(S (NP a) (VP b))`.
pub fn parse_bracket_tree(s: &[u8]) -> Result<BracketTree, TreeParseError> {
    let toks = lex_brackets(s);
    let mut pos = 0;
    let tree = parse_node(&toks, &mut pos, s.len())?;
    if let Some(&(offset, _)) = toks.get(pos) {
        return Err(TreeParseError::NotATree { offset });
    }
    Ok(tree)
}

fn parse_node(
    toks: &[(usize, Tok<'_>)],
    pos: &mut usize,
    end: usize,
) -> Result<BracketTree, TreeParseError> {
    let (offset, open) = match toks.get(*pos) {
        Some(&(o, Tok::Open(b))) => (o, b),
        Some(&(o, _)) => return Err(TreeParseError::NotATree { offset: o }),
        None => return Err(TreeParseError::NotATree { offset: end }),
    };
    *pos += 1;
    let label = match toks.get(*pos) {
        Some(&(_, Tok::Word(w))) => w.to_vec(),
        Some(&(o, _)) => return Err(TreeParseError::MissingLabel { offset: o }),
        None => return Err(TreeParseError::Unbalanced { offset: end }),
    };
    *pos += 1;
    let mut children = Vec::new();
    loop {
        match toks.get(*pos) {
            None => return Err(TreeParseError::Unbalanced { offset: end }),
            Some(&(o, Tok::Close(c))) => {
                if c != closer(open) {
                    return Err(TreeParseError::Unbalanced { offset: o });
                }
                *pos += 1;
                if children.is_empty() {
                    return Err(TreeParseError::EmptyNode { offset });
                }
                return Ok(BracketTree::Node { label, children });
            }
            Some(&(_, Tok::Word(w))) => {
                children.push(BracketTree::Leaf(w.to_vec()));
                *pos += 1;
            }
            Some(&(_, Tok::Open(_))) => children.push(parse_node(toks, pos, end)?),
        }
    }
}

impl BracketTree {
    pub fn leaves(&self) -> Vec<&[u8]> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a [u8]>) {
        match self {
            BracketTree::Leaf(w) => out.push(w),
            BracketTree::Node { children, .. } => {
                for c in children {
                    c.collect_leaves(out);
                }
            }
        }
    }

    pub fn internal_count(&self) -> usize {
        match self {
            BracketTree::Leaf(_) => 0,
            BracketTree::Node { children, .. } => {
                1 + children
                    .iter()
                    .map(BracketTree::internal_count)
                    .sum::<usize>()
            }
        }
    }

    /// A node whose only child is a single word.
    pub fn is_preterminal(&self) -> bool {
        matches!(self, BracketTree::Node { children, .. }
            if matches!(children.as_slice(), [BracketTree::Leaf(_)]))
    }

    /// `(label, start, end)` for every internal node, word offsets
    /// half-open.
    pub fn spans(&self, opts: &BracketOptions) -> Vec<(Vec<u8>, usize, usize)> {
        let mut out = Vec::new();
        self.collect_spans(0, opts, &mut out);
        out
    }

    fn collect_spans(
        &self,
        start: usize,
        opts: &BracketOptions,
        out: &mut Vec<(Vec<u8>, usize, usize)>,
    ) -> usize {
        match self {
            BracketTree::Leaf(_) => start + 1,
            BracketTree::Node { label, children } => {
                let mut end = start;
                for c in children {
                    end = c.collect_spans(end, opts, out);
                }
                if !(opts.exclude_preterminals && self.is_preterminal()) {
                    let label = if opts.strip_function_tags {
                        strip_function_tag(label).to_vec()
                    } else {
                        label.clone()
                    };
                    out.push((label, start, end));
                }
                end
            }
        }
    }

    /// `[S [NP a][VP b]]`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.render(&mut out, true);
        out
    }

    fn render(&self, out: &mut Vec<u8>, first: bool) {
        match self {
            BracketTree::Leaf(w) => {
                out.push(b' ');
                out.extend_from_slice(w);
            }
            BracketTree::Node { label, children } => {
                if !first && out.last() != Some(&b']') {
                    out.push(b' ');
                }
                out.push(b'[');
                out.extend_from_slice(label);
                for c in children {
                    c.render(out, false);
                }
                out.push(b']');
            }
        }
    }
}

/// `NP-SBJ-1` becomes `NP`; labels starting with `-` (`-NONE-`) are kept.
pub fn strip_function_tag(label: &[u8]) -> &[u8] {
    if label.first() == Some(&b'-') {
        return label;
    }
    match label.iter().skip(1).position(|&b| b == b'-' || b == b'=') {
        Some(i) => &label[..i + 1],
        None => label,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BracketOptions {
    /// Ignore spans of nodes that dominate exactly one word.
    pub exclude_preterminals: bool,
    pub strip_function_tags: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BracketScore {
    #[serde(flatten)]
    pub prf: Prf,
    pub matched: usize,
    pub pred_spans: usize,
    pub gold_spans: usize,
    /// The two trees have different words; everything scores 0.
    pub leaf_mismatch: bool,
}

/// Labeled-span precision, recall and F1 between two trees, comparing span
/// multisets.
pub fn bracketing_prf(
    pred: &BracketTree,
    gold: &BracketTree,
    opts: &BracketOptions,
) -> BracketScore {
    let ps = pred.spans(opts);
    let gs = gold.spans(opts);
    if pred.leaves() != gold.leaves() {
        return BracketScore {
            prf: Prf {
                precision: 0.0,
                recall: 0.0,
                f1: 0.0,
            },
            matched: 0,
            pred_spans: ps.len(),
            gold_spans: gs.len(),
            leaf_mismatch: true,
        };
    }
    let matched = multiset_overlap(&ps, &gs);
    BracketScore {
        prf: Prf::from_counts(matched, ps.len(), gs.len()),
        matched,
        pred_spans: ps.len(),
        gold_spans: gs.len(),
        leaf_mismatch: false,
    }
}

fn multiset_overlap<T: std::hash::Hash + Eq>(a: &[T], b: &[T]) -> usize {
    let mut counts: HashMap<&T, usize> = HashMap::new();
    for x in a {
        *counts.entry(x).or_default() += 1;
    }
    let mut hits = 0;
    for y in b {
        if let Some(c) = counts.get_mut(y) {
            if *c > 0 {
                *c -= 1;
                hits += 1;
            }
        }
    }
    hits
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValidityFailure {
    /// The leaves are not exactly the input words in order.
    Completeness,
    /// Some bracket is unmatched or mismatched.
    Balance,
    /// Some bracket carries a missing or unknown label.
    LabelConsistency,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Validity {
    pub valid: bool,
    pub failures: Vec<ValidityFailure>,
}

/// Checks a bracket string against the three constraints of a well-formed
/// parse of `words`. Never fails, even on garbage.
pub fn check_validity<W: AsRef<[u8]>, L: AsRef<[u8]>>(
    s: &[u8],
    words: &[W],
    labels: &[L],
) -> Validity {
    let toks = lex_brackets(s);
    let mut stack: Vec<u8> = Vec::new();
    let mut leaves: Vec<&[u8]> = Vec::new();
    let mut balanced = true;
    let mut labelled = true;
    let mut i = 0;
    while i < toks.len() {
        match toks[i].1 {
            Tok::Open(b) => {
                stack.push(b);
                match toks.get(i + 1) {
                    Some(&(_, Tok::Word(label))) => {
                        if !labels.iter().any(|l| l.as_ref() == label) {
                            labelled = false;
                        }
                        i += 1;
                    }
                    _ => labelled = false,
                }
            }
            Tok::Close(c) => match stack.pop() {
                Some(open) if closer(open) == c => {}
                _ => balanced = false,
            },
            Tok::Word(w) => leaves.push(w),
        }
        i += 1;
    }
    if !stack.is_empty() || toks.is_empty() {
        balanced = false;
    }
    let complete =
        leaves.len() == words.len() && leaves.iter().zip(words).all(|(a, b)| *a == b.as_ref());
    let mut failures = Vec::new();
    if !complete {
        failures.push(ValidityFailure::Completeness);
    }
    if !balanced {
        failures.push(ValidityFailure::Balance);
    }
    if !labelled {
        failures.push(ValidityFailure::LabelConsistency);
    }
    Validity {
        valid: failures.is_empty(),
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TREE: &[u8] = b"[S [NP Nkurunziza][VP leads [NP Burundi][PP from [NP Gitega]]]]";

    fn m() -> CieMarkers {
        CieMarkers::default()
    }

    #[test]
    fn triplets_from_linearization() {
        let s =
            b"[s] Witchita [r] cast member [o] John Smith [s] Witchita [r] instance of [o] film";
        let got = parse_triplets(s, &m()).unwrap();
        let want: TripletSet = [
            Triplet::new("Witchita", "cast member", "John Smith"),
            Triplet::new("Witchita", "instance of", "film"),
        ]
        .into();
        assert_eq!(got, want);
        assert_eq!(linearize_triplets(&want, &m()), s.to_vec());
        assert!(parse_triplets(b"", &m()).unwrap().is_empty());
        assert!(parse_triplets(b"  ", &m()).unwrap().is_empty());
    }

    #[test]
    fn duplicate_triplets_collapse() {
        let s = b"[s] a [r] b [o] c [s] a [r] b [o] c";
        assert_eq!(parse_triplets(s, &m()).unwrap().len(), 1);
    }

    #[test]
    fn whitespace_tolerant() {
        let s = b"  [s]a[r]  b [o] c\n";
        let got = parse_triplets(s, &m()).unwrap();
        assert_eq!(got.into_iter().next().unwrap(), Triplet::new("a", "b", "c"));
    }

    #[test]
    fn malformed_triplets_report_offset() {
        let e = parse_triplets(b"[s] a [o] c", &m()).unwrap_err();
        assert_eq!(e.offset, 6);
        let e = parse_triplets(b"junk", &m()).unwrap_err();
        assert_eq!(e.offset, 0);
        let e = parse_triplets(b"[s] a [r] b", &m()).unwrap_err();
        assert_eq!(e.offset, 11);
        let e = parse_triplets(b"[s] a [r] [o] c", &m()).unwrap_err();
        assert!(e.message.contains("relation"), "{e}");
    }

    fn set(ts: &[(&str, &str, &str)]) -> TripletSet {
        ts.iter()
            .map(|(s, r, o)| Triplet::new(*s, *r, *o))
            .collect()
    }

    #[test]
    fn cie_micro_scores() {
        let gold: Vec<TripletSet> = (0..10)
            .map(|i| set(&[(&format!("e{i}"), "r", "x"), (&format!("e{i}"), "q", "y")]))
            .collect();
        let p = cie_prf(&gold, &gold).unwrap();
        assert_eq!((p.precision, p.recall, p.f1), (1.0, 1.0, 1.0));

        let pred: Vec<TripletSet> = gold
            .iter()
            .map(|g| {
                let mut p = g.clone();
                p.insert(Triplet::new("spurious", "r", "x"));
                p
            })
            .collect();
        let p = cie_prf(&pred, &gold).unwrap();
        assert!((p.precision - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(p.recall, 1.0);
        assert!((p.f1 - 0.8).abs() < 1e-12);

        let empty = vec![TripletSet::new(); 10];
        let p = cie_prf(&empty, &gold).unwrap();
        assert_eq!((p.precision, p.recall, p.f1), (0.0, 0.0, 0.0));
        let p = cie_prf(&empty, &empty).unwrap();
        assert_eq!((p.precision, p.recall, p.f1), (1.0, 1.0, 1.0));
        assert!(cie_prf(&empty[..2], &empty).is_err());
    }

    #[test]
    fn ed_scores() {
        assert_eq!(ed_accuracy(&["a", "b"], &["a", "b"]).unwrap(), 1.0);
        assert_eq!(
            ed_accuracy(&["a", "b", "c", "d"], &["a", "b", "c", "x"]).unwrap(),
            0.75
        );
        let none: [&str; 0] = [];
        assert_eq!(ed_accuracy(&none, &none), Err(MetricError::Empty));
        assert!(ed_accuracy(&["a"], &none).is_err());
    }

    #[test]
    fn parses_trees() {
        let t = parse_bracket_tree(TREE).unwrap();
        assert_eq!(t.internal_count(), 6);
        assert_eq!(t.leaves().len(), 5);
        assert_eq!(t.to_bytes(), TREE.to_vec());

        let t = parse_bracket_tree(b"( S ( NP a ) )").unwrap();
        assert_eq!(
            t,
            BracketTree::Node {
                label: b"S".to_vec(),
                children: vec![BracketTree::Node {
                    label: b"NP".to_vec(),
                    children: vec![BracketTree::Leaf(b"a".to_vec())]
                }]
            }
        );
        assert!(matches!(
            parse_bracket_tree(b"[S [NP x]"),
            Err(TreeParseError::Unbalanced { .. })
        ));
        assert!(matches!(
            parse_bracket_tree(b"[ [NP x]]"),
            Err(TreeParseError::MissingLabel { .. })
        ));
        assert!(matches!(
            parse_bracket_tree(b"[S x][S y]"),
            Err(TreeParseError::NotATree { .. })
        ));
        assert!(parse_bracket_tree(b"[S x)").is_err());
    }

    #[test]
    fn validity_constraints() {
        let words = ["Nkurunziza", "leads", "Burundi", "from", "Gitega"];
        let labels = ["S", "NP", "VP", "PP"];
        assert!(check_validity(TREE, &words, &labels).valid);
        let v = check_validity(b"[S [NP x]]", &["x", "y"], &labels);
        assert_eq!(v.failures, vec![ValidityFailure::Completeness]);
        let v = check_validity(b"[S [ZZ x]]", &["x"], &["S", "NP"]);
        assert_eq!(v.failures, vec![ValidityFailure::LabelConsistency]);
        let v = check_validity(b"[S [NP x]", &["x"], &labels);
        assert_eq!(v.failures, vec![ValidityFailure::Balance]);
        let v = check_validity(b"[S x]]", &["x"], &labels);
        assert_eq!(v.failures, vec![ValidityFailure::Balance]);
        assert!(!check_validity(b"", &["x"], &labels).valid);
    }

    fn tree(s: &str) -> BracketTree {
        parse_bracket_tree(s.as_bytes()).unwrap()
    }

    #[test]
    fn bracketing_scores() {
        let opts = BracketOptions::default();
        let r = bracketing_prf(&tree("[S [NP a][NP b]]"), &tree("[S [NP a][VP b]]"), &opts);
        assert!((r.prf.precision - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.prf.recall - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.prf.f1 - 2.0 / 3.0).abs() < 1e-12);

        let t = tree("[S [NP a][VP b]]");
        assert_eq!(bracketing_prf(&t, &t, &opts).prf.f1, 1.0);
        let r = bracketing_prf(&tree("[A x]"), &tree("[B x]"), &opts);
        assert_eq!((r.prf.precision, r.prf.recall, r.prf.f1), (0.0, 0.0, 0.0));

        let r = bracketing_prf(&tree("[S a]"), &tree("[S b]"), &opts);
        assert!(r.leaf_mismatch);
        assert_eq!(r.prf.f1, 0.0);
    }

    #[test]
    fn bracketing_flags() {
        let pred = tree("[S [NP-SBJ a][VP b c]]");
        let gold = tree("[S [NP a][VP b c]]");
        let plain = bracketing_prf(&pred, &gold, &BracketOptions::default());
        assert_eq!(plain.matched, 2);
        let stripped = BracketOptions {
            strip_function_tags: true,
            ..BracketOptions::default()
        };
        assert_eq!(bracketing_prf(&pred, &gold, &stripped).matched, 3);
        let no_preterminals = BracketOptions {
            exclude_preterminals: true,
            ..BracketOptions::default()
        };
        let r = bracketing_prf(&pred, &gold, &no_preterminals);
        assert_eq!((r.pred_spans, r.gold_spans, r.matched), (2, 2, 2));
        assert_eq!(strip_function_tag(b"-NONE-"), b"-NONE-");
        assert_eq!(strip_function_tag(b"NP-SBJ-1"), b"NP");
    }
}
