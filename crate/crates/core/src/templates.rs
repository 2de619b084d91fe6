//! Input-dependent grammar builders for the three evaluated tasks.
//!
//! Surface conventions:
//!
//! * cIE: `[s] subject [r] relation [o] object`, triplets joined by a single
//!   space, zero or more triplets.
//! * ED: `{left}<ent> {mention} [{entity}] </ent>`; the left context is
//!   reproduced verbatim.
//! * CP: `[` is immediately followed by the label; every word is preceded by
//!   one space; `]` is never preceded by a space; `[` is preceded by a space
//!   unless it is the first byte or follows `]`. Example:
//!   `[S [NP Nkurunziza][VP leads [NP Burundi]]]`.

use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;

use crate::catalog::{Catalog, CatalogError};
use crate::grammar::{lex, nt, t, Grammar, GrammarBuilder, SymbolId};

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("marker {0:?} is empty")]
    EmptyMarker(String),
    #[error("markers {0:?} and {1:?} coincide")]
    DuplicateMarker(String, String),
    #[error("catalog {catalog} entry {entry:?} contains marker {marker:?}")]
    MarkerCollision {
        catalog: String,
        entry: String,
        marker: String,
    },
    #[error("entity disambiguation needs at least one candidate")]
    NoCandidates,
    #[error("mention is empty")]
    EmptyMention,
    #[error("sentence has no words")]
    NoWords,
    #[error("label set is empty")]
    NoLabels,
    #[error("max_open {max_open} is smaller than the word count {words}")]
    MaxOpenTooSmall { max_open: usize, words: usize },
    #[error("invalid {kind} {value:?}: must be non-empty without whitespace or brackets")]
    BadToken { kind: &'static str, value: String },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

fn lossy(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn contains(hay: &[u8], needle: &[u8]) -> bool {
    !needle.is_empty() && hay.windows(needle.len()).any(|w| w == needle)
}

pub(crate) fn trim(b: &[u8]) -> &[u8] {
    let start = b
        .iter()
        .position(|c| !c.is_ascii_whitespace())
        .unwrap_or(b.len());
    let end = b
        .iter()
        .rposition(|c| !c.is_ascii_whitespace())
        .map_or(start, |e| e + 1);
    &b[start..end]
}

// ---------------------------------------------------------------- cIE

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CieMarkers {
    pub subject: Vec<u8>,
    pub relation: Vec<u8>,
    pub object: Vec<u8>,
    /// Between consecutive triplets.
    pub separator: Vec<u8>,
}

impl Default for CieMarkers {
    fn default() -> Self {
        CieMarkers {
            subject: b"[s] ".to_vec(),
            relation: b" [r] ".to_vec(),
            object: b" [o] ".to_vec(),
            separator: b" ".to_vec(),
        }
    }
}

impl CieMarkers {
    /// The markers with surrounding whitespace removed: the form searched
    /// for when parsing.
    pub fn cores(&self) -> [&[u8]; 3] {
        [
            trim(&self.subject),
            trim(&self.relation),
            trim(&self.object),
        ]
    }

    fn check(&self) -> Result<(), TemplateError> {
        let cores = self.cores();
        for c in cores {
            if c.is_empty() {
                return Err(TemplateError::EmptyMarker(lossy(c)));
            }
        }
        for i in 0..3 {
            for j in i + 1..3 {
                if cores[i] == cores[j]
                    || contains(cores[i], cores[j])
                    || contains(cores[j], cores[i])
                {
                    return Err(TemplateError::DuplicateMarker(
                        lossy(cores[i]),
                        lossy(cores[j]),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CieSchema {
    pub entities: Arc<Catalog>,
    pub relations: Arc<Catalog>,
    pub markers: CieMarkers,
}

impl CieSchema {
    pub fn new(entities: Arc<Catalog>, relations: Arc<Catalog>) -> Result<Self, TemplateError> {
        Self::with_markers(entities, relations, CieMarkers::default())
    }

    pub fn with_markers(
        entities: Arc<Catalog>,
        relations: Arc<Catalog>,
        markers: CieMarkers,
    ) -> Result<Self, TemplateError> {
        markers.check()?;
        for catalog in [&entities, &relations] {
            for entry in catalog.entries() {
                for core in markers.cores() {
                    if contains(entry, core) {
                        return Err(TemplateError::MarkerCollision {
                            catalog: catalog.name().to_owned(),
                            entry: lossy(entry),
                            marker: lossy(core),
                        });
                    }
                }
            }
        }
        Ok(CieSchema {
            entities,
            relations,
            markers,
        })
    }
}

/// Zero or more triplets over the schema's catalogs.
///
/// ```text
/// S ::= "" | T R;   R ::= "" | " " T R;
/// T ::= "[s] " @entities " [r] " @relations " [o] " @entities;
/// ```
pub fn build_cie_grammar(schema: &CieSchema) -> Grammar {
    let m = &schema.markers;
    let mut b = GrammarBuilder::new();
    let s = b.symbol("S");
    let triplet = b.symbol("Triplet");
    let rest = b.symbol("Rest");
    b.rule(s, vec![]);
    b.rule(s, vec![nt(triplet), nt(rest)]);
    b.rule(rest, vec![]);
    b.rule(rest, vec![t(&m.separator), nt(triplet), nt(rest)]);
    b.rule(
        triplet,
        vec![
            t(&m.subject),
            lex("entities"),
            t(&m.relation),
            lex("relations"),
            t(&m.object),
            lex("entities"),
        ],
    );
    b.build(s)
        .with_catalog("entities", schema.entities.clone())
        .with_catalog("relations", schema.relations.clone())
}

// ----------------------------------------------------------------- ED

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdMarkers {
    pub open_mention: Vec<u8>,
    pub close_mention: Vec<u8>,
    pub open_entity: Vec<u8>,
    pub close_entity: Vec<u8>,
}

impl Default for EdMarkers {
    fn default() -> Self {
        EdMarkers {
            open_mention: b"<ent>".to_vec(),
            close_mention: b"</ent>".to_vec(),
            open_entity: b"[".to_vec(),
            close_entity: b"]".to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdInstance {
    pub left: Vec<u8>,
    pub mention: Vec<u8>,
    pub candidates: Vec<Vec<u8>>,
    pub markers: EdMarkers,
}

/// Instance file format: `{"left": ..., "mention": ..., "candidates": [...]}`.
#[derive(Debug, Clone, Deserialize)]
pub struct EdInstanceFile {
    #[serde(default)]
    pub left: String,
    pub mention: String,
    #[serde(default)]
    pub candidates: Vec<String>,
}

impl From<EdInstanceFile> for EdInstance {
    fn from(f: EdInstanceFile) -> Self {
        EdInstance::new(
            f.left,
            f.mention,
            f.candidates.into_iter().map(String::into_bytes).collect(),
        )
    }
}

impl EdInstance {
    pub fn new(
        left: impl Into<Vec<u8>>,
        mention: impl Into<Vec<u8>>,
        candidates: Vec<Vec<u8>>,
    ) -> Self {
        EdInstance {
            left: left.into(),
            mention: mention.into(),
            candidates,
            markers: EdMarkers::default(),
        }
    }

    /// Everything before the entity name.
    pub fn prefix(&self) -> Vec<u8> {
        let m = &self.markers;
        let mut out = self.left.clone();
        out.extend_from_slice(&m.open_mention);
        out.push(b' ');
        out.extend_from_slice(&self.mention);
        out.push(b' ');
        out.extend_from_slice(&m.open_entity);
        out
    }

    /// Everything after the entity name.
    pub fn suffix(&self) -> Vec<u8> {
        let m = &self.markers;
        let mut out = m.close_entity.clone();
        out.push(b' ');
        out.extend_from_slice(&m.close_mention);
        out
    }

    pub fn output_for(&self, entity: &[u8]) -> Vec<u8> {
        let mut out = self.prefix();
        out.extend_from_slice(entity);
        out.extend(self.suffix());
        out
    }

    /// The entity name inside a decoded output, if it has the fixed frame.
    pub fn extract_entity<'a>(&self, output: &'a [u8]) -> Option<&'a [u8]> {
        output
            .strip_prefix(self.prefix().as_slice())?
            .strip_suffix(self.suffix().as_slice())
    }
}

#[derive(Debug, Clone)]
pub enum EdMode {
    /// Candidates come from the instance.
    InputDependent,
    /// Any entry of the knowledge-base catalog may fill the entity slot.
    InputIndependent(Arc<Catalog>),
}

pub fn build_ed_grammar(inst: &EdInstance, mode: &EdMode) -> Result<Grammar, TemplateError> {
    if inst.mention.is_empty() {
        return Err(TemplateError::EmptyMention);
    }
    let mut b = GrammarBuilder::new();
    let s = b.symbol("S");
    match mode {
        EdMode::InputDependent => {
            if inst.candidates.iter().all(Vec::is_empty) {
                return Err(TemplateError::NoCandidates);
            }
            let e = b.symbol("Entity");
            b.rule(s, vec![t(inst.prefix()), nt(e), t(inst.suffix())]);
            let mut seen: Vec<&[u8]> = Vec::new();
            for c in inst.candidates.iter().filter(|c| !c.is_empty()) {
                if !seen.contains(&c.as_slice()) {
                    seen.push(c);
                    b.rule(e, vec![t(c)]);
                }
            }
            Ok(b.build(s))
        }
        EdMode::InputIndependent(kb) => {
            b.rule(s, vec![t(inst.prefix()), lex("kb"), t(inst.suffix())]);
            Ok(b.build(s).with_catalog("kb", kb.clone()))
        }
    }
}

// ----------------------------------------------------------------- CP

const PHRASE_LABELS: &[&str] = &[
    "ADJP", "ADVP", "CONJP", "FRAG", "INTJ", "LST", "NAC", "NP", "NX", "PP", "PRN", "PRT", "QP",
    "RRC", "S", "SBAR", "SBARQ", "SINV", "SQ", "UCP", "VP", "WHADJP", "WHADVP", "WHNP", "WHPP",
    "X",
];

const POS_TAGS: &[&str] = &[
    "CC", "CD", "DT", "EX", "FW", "IN", "JJ", "JJR", "JJS", "LS", "MD", "NN", "NNS", "NNP", "NNPS",
    "PDT", "POS", "PRP", "PRP$", "RB", "RBR", "RBS", "RP", "SYM", "TO", "UH", "VB", "VBD", "VBG",
    "VBN", "VBP", "VBZ", "WDT", "WP", "WP$", "WRB",
];

const FUNCTION_TAGS: &[&str] = &[
    "ADV", "BNF", "CLR", "CLF", "DIR", "DTV", "EXT", "HLN", "LGS", "LOC", "MNR", "NOM", "PRD",
    "PRP", "PUT", "SBJ", "TMP", "TPC", "TTL", "VOC",
];

/// Penn Treebank phrase labels and part-of-speech tags, without function tags.
pub fn penn_labels() -> Vec<Vec<u8>> {
    PHRASE_LABELS
        .iter()
        .chain(POS_TAGS)
        .map(|l| l.as_bytes().to_vec())
        .collect()
}

/// [`penn_labels`] plus every phrase label suffixed with `-TAG` for the
/// standard function tags (`NP-SBJ`, `PP-LOC`, ...).
pub fn penn_labels_with_function_tags() -> Vec<Vec<u8>> {
    let mut out = penn_labels();
    for p in PHRASE_LABELS {
        for f in FUNCTION_TAGS {
            out.push(format!("{p}-{f}").into_bytes());
        }
    }
    out
}

fn check_token(kind: &'static str, v: &[u8]) -> Result<(), TemplateError> {
    let bad = v.is_empty()
        || v.iter()
            .any(|c| c.is_ascii_whitespace() || matches!(c, b'[' | b']' | b'(' | b')'));
    if bad {
        Err(TemplateError::BadToken {
            kind,
            value: lossy(v),
        })
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CpInstance {
    pub words: Vec<Vec<u8>>,
    pub labels: Vec<Vec<u8>>,
    pub max_open: usize,
}

/// Instance file format: `{"words": [...], "labels": [...]}`; labels default
/// to [`penn_labels`], `max_open` to `2n + 2`.
#[derive(Debug, Clone, Deserialize)]
pub struct CpInstanceFile {
    pub words: Vec<String>,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
    #[serde(default)]
    pub max_open: Option<usize>,
}

impl TryFrom<CpInstanceFile> for CpInstance {
    type Error = TemplateError;

    fn try_from(f: CpInstanceFile) -> Result<Self, Self::Error> {
        let words: Vec<Vec<u8>> = f.words.into_iter().map(String::into_bytes).collect();
        let labels = f
            .labels
            .map(|ls| ls.into_iter().map(String::into_bytes).collect())
            .unwrap_or_else(penn_labels);
        let max_open = f.max_open.unwrap_or(2 * words.len() + 2);
        CpInstance::with_max_open(words, labels, max_open)
    }
}

impl CpInstance {
    pub fn new(words: Vec<Vec<u8>>, labels: Vec<Vec<u8>>) -> Result<Self, TemplateError> {
        let max_open = 2 * words.len() + 2;
        Self::with_max_open(words, labels, max_open)
    }

    pub fn with_max_open(
        words: Vec<Vec<u8>>,
        labels: Vec<Vec<u8>>,
        max_open: usize,
    ) -> Result<Self, TemplateError> {
        if words.is_empty() {
            return Err(TemplateError::NoWords);
        }
        if labels.is_empty() {
            return Err(TemplateError::NoLabels);
        }
        if max_open < words.len() {
            return Err(TemplateError::MaxOpenTooSmall {
                max_open,
                words: words.len(),
            });
        }
        for w in &words {
            check_token("word", w)?;
        }
        for l in &labels {
            check_token("label", l)?;
        }
        Ok(CpInstance {
            words,
            labels,
            max_open,
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum After {
    Label,
    Word,
    Close,
}

/// Trees over exactly the instance's words, in order, with at most
/// `max_open` simultaneously open brackets. Nonterminal `B_i_j_c` means `i`
/// words emitted, `j` brackets open, last emission `c` (label, word, close).
pub fn build_cp_grammar(inst: &CpInstance) -> Result<Grammar, TemplateError> {
    let labels = Arc::new(Catalog::new("labels", &inst.labels)?);
    let n = inst.words.len();
    let depth = inst.max_open;
    let mut b = GrammarBuilder::new();
    let s = b.symbol("S");
    let state = |b: &mut GrammarBuilder, i: usize, j: usize, c: After| -> SymbolId {
        let tag = match c {
            After::Label => 'L',
            After::Word => 'W',
            After::Close => 'C',
        };
        b.symbol(&format!("B_{i}_{j}_{tag}"))
    };
    let first = state(&mut b, 0, 1, After::Label);
    b.rule(s, vec![t("["), lex("labels"), nt(first)]);
    for i in 0..=n {
        for j in 1..=depth {
            for c in [After::Label, After::Word, After::Close] {
                let from = state(&mut b, i, j, c);
                if j < depth {
                    let open: &[u8] = if c == After::Close { b"[" } else { b" [" };
                    let to = state(&mut b, i, j + 1, After::Label);
                    b.rule(from, vec![t(open), lex("labels"), nt(to)]);
                }
                if i < n {
                    let mut word = vec![b' '];
                    word.extend_from_slice(&inst.words[i]);
                    let to = state(&mut b, i + 1, j, After::Word);
                    b.rule(from, vec![t(word), nt(to)]);
                }
                if c != After::Label {
                    if j == 1 {
                        if i == n {
                            b.rule(from, vec![t("]")]);
                        }
                    } else {
                        let to = state(&mut b, i, j - 1, After::Close);
                        b.rule(from, vec![t("]"), nt(to)]);
                    }
                }
            }
        }
    }
    Ok(b.build(s).with_catalog("labels", labels).prune())
}

/// Arbitrary trees whose leaves are all `leaf`; completeness cannot be
/// expressed without the words.
pub fn build_cp_iig_grammar(labels: &[Vec<u8>], leaf: &[u8]) -> Result<Grammar, TemplateError> {
    if labels.is_empty() {
        return Err(TemplateError::NoLabels);
    }
    check_token("leaf", leaf)?;
    let labels = Arc::new(Catalog::new("labels", labels)?);
    let mut leaf_item = vec![b' '];
    leaf_item.extend_from_slice(leaf);
    let mut b = GrammarBuilder::new();
    let tree = b.symbol("Tree");
    let body = b.symbol("Body");
    let after_word = b.symbol("AfterWord");
    let after_close = b.symbol("AfterClose");
    b.rule(tree, vec![t("["), lex("labels"), nt(body), t("]")]);
    b.rule(body, vec![t(&leaf_item), nt(after_word)]);
    b.rule(body, vec![t(" "), nt(tree), nt(after_close)]);
    b.rule(after_word, vec![]);
    b.rule(after_word, vec![t(&leaf_item), nt(after_word)]);
    b.rule(after_word, vec![t(" "), nt(tree), nt(after_close)]);
    b.rule(after_close, vec![]);
    b.rule(after_close, vec![t(&leaf_item), nt(after_word)]);
    b.rule(after_close, vec![nt(tree), nt(after_close)]);
    Ok(b.build(tree).with_catalog("labels", labels))
}
