//! Named sets of byte strings (entity names, relation names) backed by a
//! prefix trie, used as lexical-set terminals in grammars.

use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::trie::Trie;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("catalog {name}: entry {index} is empty")]
    EmptyEntry { name: String, index: usize },
    #[error("failed to read catalog {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone)]
pub struct Catalog {
    name: String,
    entries: Vec<Vec<u8>>,
    trie: Arc<Trie<u8>>,
    skipped_lines: usize,
}

impl Catalog {
    /// Builds a catalog from entries; duplicates collapse, empty entries are
    /// rejected.
    pub fn new<I, S>(name: impl Into<String>, entries: I) -> Result<Self, CatalogError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        let name = name.into();
        let mut list = Vec::new();
        for (index, e) in entries.into_iter().enumerate() {
            let e = e.as_ref();
            if e.is_empty() {
                return Err(CatalogError::EmptyEntry { name, index });
            }
            list.push(e.to_vec());
        }
        Ok(Self::from_sorted(name, list, 0))
    }

    fn from_sorted(name: String, mut entries: Vec<Vec<u8>>, skipped_lines: usize) -> Self {
        entries.sort_unstable();
        entries.dedup();
        let trie = Arc::new(Trie::from_keys(&entries));
        Catalog {
            name,
            entries,
            trie,
            skipped_lines,
        }
    }

    /// Parses one entry per line. Empty lines are skipped and counted.
    pub fn from_lines(name: impl Into<String>, text: &[u8]) -> Self {
        let mut entries = Vec::new();
        let mut skipped = 0;
        let body = text.strip_suffix(b"\n").unwrap_or(text);
        if !text.is_empty() {
            for line in body.split(|&b| b == b'\n') {
                let line = line.strip_suffix(b"\r").unwrap_or(line);
                if line.is_empty() {
                    skipped += 1;
                } else {
                    entries.push(line.to_vec());
                }
            }
        }
        Self::from_sorted(name.into(), entries, skipped)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Entries in byte-lexicographic order.
    pub fn entries(&self) -> &[Vec<u8>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, entry: &[u8]) -> bool {
        self.trie.contains(entry)
    }

    pub fn trie(&self) -> &Arc<Trie<u8>> {
        &self.trie
    }

    pub fn max_entry_len(&self) -> usize {
        self.entries.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Number of empty lines dropped by [`Catalog::from_lines`] / [`load_catalog`].
    pub fn skipped_lines(&self) -> usize {
        self.skipped_lines
    }
}

/// Loads a catalog file (UTF-8, one entry per line). The catalog is named
/// after the file stem.
pub fn load_catalog(path: impl AsRef<Path>) -> Result<Catalog, CatalogError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| CatalogError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let catalog = Catalog::from_lines(name, &bytes);
    if catalog.skipped_lines() > 0 {
        log::warn!(
            "catalog {}: skipped {} empty line(s)",
            path.display(),
            catalog.skipped_lines()
        );
    }
    Ok(catalog)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use std::io::Write;

    #[test]
    fn loads_entries_from_file() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "Tamil_language").unwrap();
        writeln!(f, "B._Babusivan").unwrap();
        let cat = load_catalog(f.path()).unwrap();
        assert_eq!(cat.len(), 2);
        assert!(cat.contains(b"Tamil_language"));
        assert!(cat.contains(b"B._Babusivan"));
    }

    #[test]
    fn duplicates_collapse_and_blank_lines_are_counted() {
        let cat = Catalog::from_lines("c", b"film\n\nfilm\n");
        assert_eq!(cat.len(), 1);
        assert_eq!(cat.skipped_lines(), 1);
    }

    #[test]
    fn rejects_empty_entry() {
        assert!(matches!(
            Catalog::new("c", ["a", ""]),
            Err(CatalogError::EmptyEntry { index: 1, .. })
        ));
    }

    #[test]
    fn trie_agrees_with_linear_scan() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let alphabet = b"abcdefgh";
        let gen = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<u8> {
            let len = rng.random_range(1..=8);
            (0..len)
                .map(|_| alphabet[rng.random_range(0..alphabet.len())])
                .collect()
        };
        let entries: Vec<Vec<u8>> = (0..100_000).map(|_| gen(&mut rng)).collect();
        let cat = Catalog::new("synthetic", &entries).unwrap();
        for i in 0..1000 {
            let probe = if i % 2 == 0 {
                entries[rng.random_range(0..entries.len())].clone()
            } else {
                gen(&mut rng)
            };
            let linear = entries.contains(&probe);
            assert_eq!(cat.contains(&probe), linear, "probe {probe:?}");
        }
    }
}
