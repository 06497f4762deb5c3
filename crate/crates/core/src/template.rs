//! Full-query template completion: the template grammar is instantiated
//! online, each completion running to the next atom boundary.

use std::sync::Arc;

use crate::grammar::Grammar;
use crate::semantics::{Completion, Grade, Source};

/// Raw candidates produced per call.
pub const CANDIDATE_CAP: usize = 100;

#[derive(Clone, Debug)]
pub struct TemplateSet {
    pub grammar: Arc<Grammar>,
}

impl TemplateSet {
    pub fn new(grammar: Arc<Grammar>) -> Self {
        TemplateSet { grammar }
    }

    /// Up to `limit` (at most [`CANDIDATE_CAP`]) template completions, best first.
    pub fn complete(&self, prefix: &str, limit: usize) -> Vec<Completion> {
        if prefix.trim().is_empty() {
            return Vec::new();
        }
        self.grammar
            .enumerate_completions(prefix, limit.min(CANDIDATE_CAP))
            .into_iter()
            .map(|e| Completion {
                completion: e.text,
                interpretation: e.formula,
                dtype: e.dtype,
                grade: Grade::Medium,
                score: e.score,
                source: Source::Template,
            })
            .collect()
    }
}
