//! Completability analysis: can the prefix be extended to something the
//! grammar understands?

use serde::{Deserialize, Serialize};

use crate::grammar::Grammar;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completability {
    pub completable: bool,
    /// Byte offset of the first character after which no extension exists.
    pub dead_at: Option<usize>,
}

pub fn completable(grammar: &Grammar, prefix: &str) -> Completability {
    if grammar.probe(prefix) {
        return Completability { completable: true, dead_at: None };
    }
    Completability { completable: false, dead_at: Some(first_dead_char(grammar, prefix)) }
}

/// Start of the character whose addition first makes the prefix
/// uncompletable. Assumes completability is monotone under truncation,
/// which holds except around digit-grouping commas (`1,` is live again
/// once `1,000` is typed).
pub fn first_dead_char(grammar: &Grammar, prefix: &str) -> usize {
    let ends: Vec<usize> = prefix.char_indices().map(|(i, c)| i + c.len_utf8()).collect();
    // Smallest k with probe(prefix[..ends[k]]) false; the full prefix is dead.
    let (mut lo, mut hi) = (0usize, ends.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if grammar.probe(&prefix[..ends[mid]]) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    prefix.char_indices().nth(lo).map_or(0, |(i, _)| i)
}
