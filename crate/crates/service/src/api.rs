//! Response bodies. Field names and shapes are covered by
//! [`SCHEMA_VERSION`](crate::SCHEMA_VERSION); bump it on any breaking change.

use serde::{Deserialize, Serialize};

use semcomplete_core::grammar::ParseResult;
use semcomplete_core::semantics::{Completion, Grade, Source};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HealthResponse {
    pub schema: u32,
    pub status: String,
    pub domain: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompletionItem {
    pub completion: String,
    /// Canonical serialization of the formula.
    pub interpretation: String,
    pub dtype: String,
    pub grade: Grade,
    pub source: Source,
    pub score: f64,
}

impl From<&Completion> for CompletionItem {
    fn from(c: &Completion) -> Self {
        CompletionItem {
            completion: c.completion.clone(),
            interpretation: c.interpretation.key(),
            dtype: c.dtype.to_string(),
            grade: c.grade,
            source: c.source,
            score: c.score,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompleteResponse {
    pub schema: u32,
    pub prefix: String,
    pub completions: Vec<CompletionItem>,
    /// Engines that missed their time budget for this request.
    pub timed_out: Vec<Source>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomItem {
    pub atom: String,
    /// Token range `[start, end)` of the atom's phrase.
    pub span: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParseItem {
    /// `None` when the parse carries no constraint.
    pub interpretation: Option<String>,
    pub tokens: Vec<String>,
    pub atoms: Vec<AtomItem>,
}

impl From<&ParseResult> for ParseItem {
    fn from(p: &ParseResult) -> Self {
        ParseItem {
            interpretation: p.formula().map(|f| f.key()),
            tokens: p.derivation.tokens.clone(),
            atoms: p
                .derivation
                .atoms
                .iter()
                .map(|a| AtomItem { atom: a.atom.to_string(), span: [a.span.start, a.span.end] })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParseResponse {
    pub schema: u32,
    pub query: String,
    /// Complete parses, best first.
    pub parses: Vec<ParseItem>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompletabilityResponse {
    pub schema: u32,
    pub prefix: String,
    pub completable: bool,
    /// Byte offset after which the prefix can no longer be extended.
    pub dead_at: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorResponse {
    pub schema: u32,
    pub error: String,
}
