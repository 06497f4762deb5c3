//! Most-popular completion over a trie of logged queries.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::grammar::Grammar;
use crate::querylog::LogCorpus;
use crate::semantics::{Completion, Derivation, Formula, Grade, Source};
use crate::text;
use crate::trie::RankedTrie;

pub const DEFAULT_K: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MpcEntry {
    /// Normalized query text.
    pub text: String,
    pub frequency: u64,
    /// Canonical interpretation of the best parse.
    pub formula: Formula,
    pub derivation: Derivation,
}

/// Logged queries in rank order (frequency desc, then text), with a trie
/// over their normalized text.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct MpcIndex {
    pub entries: Vec<MpcEntry>,
    trie: RankedTrie,
    /// Queries dropped at build time because they did not parse.
    pub dropped: usize,
}

impl MpcIndex {
    pub fn build(corpus: &LogCorpus, grammar: &Grammar) -> Self {
        let mut freq: HashMap<String, u64> = HashMap::new();
        let mut order = Vec::new();
        for q in &corpus.queries {
            let norm = text::normalize_trimmed(&q.text);
            if norm.is_empty() {
                continue;
            }
            match freq.get_mut(&norm) {
                Some(f) => *f += q.frequency,
                None => {
                    freq.insert(norm.clone(), q.frequency);
                    order.push(norm);
                }
            }
        }
        let mut entries = Vec::with_capacity(order.len());
        let mut dropped = 0;
        for norm in order {
            let Some(best) = grammar.best_parse(&norm) else {
                dropped += 1;
                continue;
            };
            let Some(formula) = best.derivation.canonical_formula() else {
                dropped += 1;
                continue;
            };
            entries.push(MpcEntry { frequency: freq[&norm], text: norm, formula, derivation: best.derivation });
        }
        if dropped > 0 {
            log::warn!("mpc: dropped {dropped} unparsable queries");
        }
        Self::from_entries(entries, dropped)
    }

    pub(crate) fn from_entries(mut entries: Vec<MpcEntry>, dropped: usize) -> Self {
        entries.sort_by(|a, b| b.frequency.cmp(&a.frequency).then_with(|| a.text.cmp(&b.text)));
        let trie = RankedTrie::build(entries.iter().enumerate().map(|(i, e)| (e.text.as_str(), i as u32)));
        MpcIndex { entries, trie, dropped }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Top `k` logged queries extending `prefix`.
    pub fn complete(&self, prefix: &str, k: usize) -> Vec<Completion> {
        let t = text::tokenize(prefix);
        if t.is_empty() {
            return Vec::new();
        }
        let key = t.normalized();
        let cursor = if t.partial_last() { t.len() - 1 } else { t.len() };
        self.trie
            .prefix(&key)
            .iter()
            .take(k)
            .map(|&id| {
                let e = &self.entries[id as usize];
                let dtype = e
                    .derivation
                    .atom_at(cursor)
                    .map(|a| a.atom.field.clone())
                    .expect("indexed queries have at least one atom");
                Completion {
                    completion: e.text.clone(),
                    interpretation: e.formula.clone(),
                    dtype,
                    grade: Grade::High,
                    score: e.frequency as f64,
                    source: Source::Mpc,
                }
            })
            .collect()
    }
}
