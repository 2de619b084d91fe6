//! Compact prefix trie over arbitrary ordered keys.
//!
//! Built once through [`TrieBuilder`], then frozen into a CSR layout: each
//! node's children are a contiguous, key-sorted slice, so child lookup is a
//! binary search and iteration follows key order. Accepting nodes carry a
//! list of `u32` payloads (token ids for vocabularies, entry indices for
//! catalogs).

use std::fmt;

/// Index of a trie node. The root is always [`Trie::ROOT`].
pub type NodeId = u32;

#[derive(Clone)]
pub struct Trie<K> {
    child_start: Vec<u32>,
    child_keys: Vec<K>,
    child_nodes: Vec<NodeId>,
    payload_start: Vec<u32>,
    payloads: Vec<u32>,
}

impl<K: Copy + Ord> Trie<K> {
    pub const ROOT: NodeId = 0;

    /// Builds a trie where entry `i` carries payload `i`.
    pub fn from_keys<I, S>(keys: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[K]>,
    {
        let mut builder = TrieBuilder::new();
        for (idx, key) in keys.into_iter().enumerate() {
            builder.insert(key.as_ref(), idx as u32);
        }
        builder.build()
    }

    pub fn node_count(&self) -> usize {
        self.child_start.len() - 1
    }

    pub fn children(&self, node: NodeId) -> impl ExactSizeIterator<Item = (K, NodeId)> + '_ {
        let range = self.child_range(node);
        self.child_keys[range.clone()]
            .iter()
            .copied()
            .zip(self.child_nodes[range].iter().copied())
    }

    pub fn child_count(&self, node: NodeId) -> usize {
        self.child_range(node).len()
    }

    pub fn has_children(&self, node: NodeId) -> bool {
        !self.child_range(node).is_empty()
    }

    pub fn child(&self, node: NodeId, key: K) -> Option<NodeId> {
        let range = self.child_range(node);
        let keys = &self.child_keys[range.clone()];
        keys.binary_search(&key)
            .ok()
            .map(|offset| self.child_nodes[range.start + offset])
    }

    pub fn payload(&self, node: NodeId) -> &[u32] {
        let start = self.payload_start[node as usize] as usize;
        let end = self.payload_start[node as usize + 1] as usize;
        &self.payloads[start..end]
    }

    pub fn is_accepting(&self, node: NodeId) -> bool {
        !self.payload(node).is_empty()
    }

    /// Follows `path` from the root.
    pub fn walk(&self, path: &[K]) -> Option<NodeId> {
        self.walk_from(Self::ROOT, path)
    }

    pub fn walk_from(&self, mut node: NodeId, path: &[K]) -> Option<NodeId> {
        for &k in path {
            node = self.child(node, k)?;
        }
        Some(node)
    }

    pub fn contains(&self, key: &[K]) -> bool {
        self.walk(key).is_some_and(|n| self.is_accepting(n))
    }

    fn child_range(&self, node: NodeId) -> std::ops::Range<usize> {
        self.child_start[node as usize] as usize..self.child_start[node as usize + 1] as usize
    }
}

impl<K> fmt::Debug for Trie<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Trie")
            .field("nodes", &(self.child_start.len() - 1))
            .field("payloads", &self.payloads.len())
            .finish()
    }
}

/// Mutable trie under construction.
#[derive(Debug, Clone)]
pub struct TrieBuilder<K> {
    children: Vec<Vec<(K, NodeId)>>,
    payloads: Vec<Vec<u32>>,
}

impl<K: Copy + Ord> Default for TrieBuilder<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K: Copy + Ord> TrieBuilder<K> {
    pub fn new() -> Self {
        TrieBuilder {
            children: vec![Vec::new()],
            payloads: vec![Vec::new()],
        }
    }

    pub fn insert(&mut self, key: &[K], payload: u32) -> NodeId {
        let mut node = 0usize;
        for &k in key {
            let slot = &self.children[node];
            node = match slot.binary_search_by(|(ck, _)| ck.cmp(&k)) {
                Ok(i) => slot[i].1 as usize,
                Err(i) => {
                    let fresh = self.children.len();
                    self.children[node].insert(i, (k, fresh as NodeId));
                    self.children.push(Vec::new());
                    self.payloads.push(Vec::new());
                    fresh
                }
            };
        }
        let slot = &mut self.payloads[node];
        if !slot.contains(&payload) {
            slot.push(payload);
        }
        node as NodeId
    }

    pub fn build(self) -> Trie<K> {
        let n = self.children.len();
        let mut child_start = Vec::with_capacity(n + 1);
        let mut child_keys = Vec::new();
        let mut child_nodes = Vec::new();
        child_start.push(0);
        for kids in &self.children {
            for &(k, c) in kids {
                child_keys.push(k);
                child_nodes.push(c);
            }
            child_start.push(child_keys.len() as u32);
        }
        let mut payload_start = Vec::with_capacity(n + 1);
        let mut payloads = Vec::new();
        payload_start.push(0);
        for mut p in self.payloads {
            p.sort_unstable();
            payloads.extend(p);
            payload_start.push(payloads.len() as u32);
        }
        Trie {
            child_start,
            child_keys,
            child_nodes,
            payload_start,
            payloads,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_and_payloads() {
        let trie = Trie::<u8>::from_keys(["film", "fish", "fi"]);
        assert!(trie.contains(b"film"));
        assert!(trie.contains(b"fi"));
        assert!(!trie.contains(b"f"));
        assert!(!trie.contains(b"films"));
        let fi = trie.walk(b"fi").unwrap();
        let keys: Vec<u8> = trie.children(fi).map(|(k, _)| k).collect();
        assert_eq!(keys, b"ls");
        assert_eq!(trie.payload(fi), &[2]);
    }

    #[test]
    fn shared_payloads_merge() {
        let mut b = TrieBuilder::new();
        b.insert(b"x", 2);
        b.insert(b"x", 1);
        b.insert(b"x", 2);
        let trie = b.build();
        assert_eq!(trie.payload(trie.walk(b"x").unwrap()), &[1, 2]);
        assert_eq!(trie.node_count(), 2);
    }
}
