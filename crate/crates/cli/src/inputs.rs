//! Loading grammars, catalogs, vocabularies and line files named on the
//! command line.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use gcdkit::synth::bpe_like_vocab;
use gcdkit::{
    load_catalog, parse_grammar, validate, Catalog, CatalogError, Diagnostic, Grammar, Recognizer,
    Vocabulary,
};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::error::{CliError, Result};

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| CliError::format("json", format!("{}: {e}", path.display())))
}

/// One JSON string per non-blank line.
pub fn read_jsonl_strings(path: &Path) -> Result<Vec<String>> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let s: String = serde_json::from_str(line).map_err(|e| {
            CliError::format(
                "jsonl",
                format!("{}:{}: expected a JSON string: {e}", path.display(), i + 1),
            )
        })?;
        out.push(s);
    }
    Ok(out)
}

pub fn catalog(path: &Path) -> Result<Arc<Catalog>> {
    load_catalog(path).map(Arc::new).map_err(|e| match e {
        CatalogError::Io { source, .. } => CliError::io(path, source),
        other => CliError::format("catalog", other),
    })
}

/// `name=path` bindings.
pub fn parse_binding(arg: &str) -> std::result::Result<(String, PathBuf), String> {
    match arg.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => {
            Ok((name.to_owned(), path.into()))
        }
        _ => Err(format!("expected NAME=PATH, got {arg:?}")),
    }
}

pub fn grammar(path: &Path, bindings: &[(String, PathBuf)]) -> Result<Grammar> {
    let mut g = parse_grammar(&read_text(path)?)
        .map_err(|e| CliError::format("grammar-syntax", format!("{}: {e}", path.display())))?;
    for (name, p) in bindings {
        g.bind_catalog(name.clone(), catalog(p)?);
    }
    Ok(g)
}

pub fn diagnostic_json(d: &Diagnostic) -> Value {
    let (kind, symbol) = match d {
        Diagnostic::UndefinedNonterminal(s) => ("undefined-nonterminal", s),
        Diagnostic::UnreachableNonterminal(s) => ("unreachable-nonterminal", s),
        Diagnostic::NonTerminating(s) => ("non-terminating", s),
        Diagnostic::UnboundLexSet(s) => ("unbound-lexset", s),
        Diagnostic::EmptyCatalog(s) => ("empty-catalog", s),
    };
    json!({"kind": kind, "symbol": symbol, "message": d.to_string()})
}

/// Validates, then compiles.
pub fn recognizer(g: &Grammar) -> Result<Arc<Recognizer>> {
    let diags = validate(g);
    if !diags.is_empty() {
        let text: Vec<String> = diags.iter().map(Diagnostic::to_string).collect();
        return Err(CliError::invalid("grammar-invalid", text.join("; ")));
    }
    Recognizer::compile(g).map_err(|e| CliError::invalid("compile", e))
}

/// A vocabulary file, or `synth:SIZE[:SEED]` for the built-in synthetic one.
pub fn vocabulary(source: &str) -> Result<Vocabulary> {
    if let Some(rest) = source.strip_prefix("synth:") {
        let mut parts = rest.splitn(2, ':');
        let bad = || {
            CliError::format(
                "vocab",
                format!("bad synthetic vocabulary source {source:?}"),
            )
        };
        let size: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let seed: u64 = match parts.next() {
            Some(s) => s.parse().map_err(|_| bad())?,
            None => 0,
        };
        if size < 128 {
            return Err(CliError::format(
                "vocab",
                "synthetic vocabularies need at least 128 tokens",
            ));
        }
        return Ok(bpe_like_vocab(size, seed));
    }
    let path = Path::new(source);
    let text = read_text(path)?;
    Vocabulary::from_json(&text).map_err(|e| CliError::format("vocab", format!("{source}: {e}")))
}

/// `hex:...` bytes, or the argument's own UTF-8 bytes.
pub fn prefix_bytes(arg: &str) -> Result<Vec<u8>> {
    match arg.strip_prefix("hex:") {
        Some(h) => hex::decode(h).map_err(|e| CliError::format("prefix", e)),
        None => Ok(arg.as_bytes().to_vec()),
    }
}

/// Resolves `p` against the directory of `base`.
pub fn relative_to(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        return p.to_path_buf();
    }
    base.parent().map_or_else(|| p.to_path_buf(), |d| d.join(p))
}
