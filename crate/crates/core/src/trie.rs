//! Byte-level prefix trie with per-node candidate lists in rank order.
//!
//! Item ids double as ranks: callers number their items best-first, so every
//! node's subtree list is simply the ascending id list of the items below it.
//! Prefix lookup is O(prefix length) and yields an already-ranked slice.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
struct Node {
    edges: (u32, u32),
    exact: (u32, u32),
    ranked: (u32, u32),
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct RankedTrie {
    nodes: Vec<Node>,
    edges: Vec<(u8, u32)>,
    exact: Vec<u32>,
    ranked: Vec<u32>,
}

/// Handle to a trie node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeRef(u32);

impl RankedTrie {
    /// Builds from `(key, id)` pairs; ids are ranks (0 is best). A key may
    /// carry several ids.
    pub fn build<K: AsRef<str>>(items: impl IntoIterator<Item = (K, u32)>) -> Self {
        let mut items: Vec<(Vec<u8>, u32)> =
            items.into_iter().map(|(k, id)| (k.as_ref().as_bytes().to_vec(), id)).collect();
        items.sort();
        let mut t = RankedTrie::default();
        t.nodes.push(Node::default());
        // Iterative build: (node index, item range, depth).
        let mut stack = vec![(0u32, 0usize, items.len(), 0usize)];
        let mut pending_edges: Vec<Vec<(u8, u32)>> = vec![Vec::new()];
        while let Some((node, lo, hi, depth)) = stack.pop() {
            let mut i = lo;
            let ex_start = t.exact.len() as u32;
            while i < hi && items[i].0.len() == depth {
                t.exact.push(items[i].1);
                i += 1;
            }
            let r_start = t.ranked.len() as u32;
            let mut ids: Vec<u32> = items[lo..hi].iter().map(|x| x.1).collect();
            ids.sort_unstable();
            t.ranked.extend(ids);
            let n = &mut t.nodes[node as usize];
            n.exact = (ex_start, t.exact.len() as u32);
            n.ranked = (r_start, t.ranked.len() as u32);
            while i < hi {
                let b = items[i].0[depth];
                let mut j = i;
                while j < hi && items[j].0[depth] == b {
                    j += 1;
                }
                let child = t.nodes.len() as u32;
                t.nodes.push(Node::default());
                pending_edges.push(Vec::new());
                pending_edges[node as usize].push((b, child));
                stack.push((child, i, j, depth + 1));
                i = j;
            }
        }
        for (idx, mut es) in pending_edges.into_iter().enumerate() {
            es.sort_unstable();
            let start = t.edges.len() as u32;
            t.edges.extend(es);
            t.nodes[idx].edges = (start, t.edges.len() as u32);
        }
        t
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() || self.subtree_len(self.root()) == 0
    }

    pub fn root(&self) -> NodeRef {
        NodeRef(0)
    }

    pub fn child(&self, n: NodeRef, b: u8) -> Option<NodeRef> {
        let node = self.nodes.get(n.0 as usize)?;
        let es = &self.edges[node.edges.0 as usize..node.edges.1 as usize];
        es.binary_search_by_key(&b, |e| e.0).ok().map(|i| NodeRef(es[i].1))
    }

    pub fn walk(&self, from: NodeRef, bytes: &[u8]) -> Option<NodeRef> {
        let mut n = from;
        for &b in bytes {
            n = self.child(n, b)?;
        }
        Some(n)
    }

    pub fn find(&self, prefix: &str) -> Option<NodeRef> {
        if self.nodes.is_empty() {
            return None;
        }
        self.walk(self.root(), prefix.as_bytes())
    }

    /// Ids whose key ends exactly at `n`.
    pub fn exact(&self, n: NodeRef) -> &[u32] {
        let node = &self.nodes[n.0 as usize];
        &self.exact[node.exact.0 as usize..node.exact.1 as usize]
    }

    /// All ids in the subtree of `n`, best rank first.
    pub fn ranked(&self, n: NodeRef) -> &[u32] {
        let node = &self.nodes[n.0 as usize];
        &self.ranked[node.ranked.0 as usize..node.ranked.1 as usize]
    }

    pub fn subtree_len(&self, n: NodeRef) -> usize {
        let node = &self.nodes[n.0 as usize];
        (node.ranked.1 - node.ranked.0) as usize
    }

    /// Ranked ids of every key starting with `prefix`.
    pub fn prefix(&self, prefix: &str) -> &[u32] {
        match self.find(prefix) {
            Some(n) => self.ranked(n),
            None => &[],
        }
    }

    /// Number of nodes, for diagnostics.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_lookup_is_ranked() {
        let t = RankedTrie::build([("amazon", 2u32), ("amazon web services", 0), ("apple", 1)]);
        assert_eq!(t.prefix("amaz"), &[0, 2]);
        assert_eq!(t.prefix(""), &[0, 1, 2]);
        assert_eq!(t.prefix("zzz"), &[] as &[u32]);
        let n = t.find("amazon").unwrap();
        assert_eq!(t.exact(n), &[2]);
    }

    #[test]
    fn duplicate_keys_keep_all_ids() {
        let t = RankedTrie::build([("b", 3u32), ("b", 1), ("bb", 0)]);
        let n = t.find("b").unwrap();
        assert_eq!(t.exact(n), &[1, 3]);
        assert_eq!(t.ranked(n), &[0, 1, 3]);
    }

    #[test]
    fn empty_trie() {
        let t = RankedTrie::build(Vec::<(&str, u32)>::new());
        assert!(t.is_empty());
        assert_eq!(t.prefix("a"), &[] as &[u32]);
    }
}
