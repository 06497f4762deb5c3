//! Grammar node arena.

use std::collections::HashMap;

use crate::lexicon::Lexicon;
use crate::semantics::{Op, Sym};
use crate::text::Sep;

use super::values::ValueParser;

pub(crate) type NodeId = u32;

#[derive(Clone, Debug, PartialEq)]
pub enum Action {
    Op(Op),
    Not,
    Or,
    And,
    Field(Sym),
    Value(Sym),
    Unit(Sym),
    /// Reuse the field of the previous atom (`between X and Y`).
    SameField,
    /// Relative times point backwards (`in the past three years`).
    Past,
}

/// Per-type or per-field sub-lexicons prepared for a constrained lookup.
#[derive(Clone, Debug)]
pub(crate) enum Constrained {
    /// Keyed by semantic type.
    Values(HashMap<Sym, Lexicon>),
    /// Keyed by numeric field.
    Units(HashMap<Sym, Lexicon>),
}

#[derive(Clone, Debug)]
pub(crate) enum Node {
    Lit { toks: Vec<String>, seps: Vec<Sep>, actions: Vec<Action> },
    Lex { lex: Lexicon, constrained: Option<Constrained> },
    Seq { items: Vec<NodeId>, atomic: bool },
    Alt(Vec<NodeId>),
    Kleene { item: NodeId, sep: NodeId, min: usize },
    Opt(NodeId),
    Ref(usize),
    CompatValue,
    CompatUnit,
    Completable { parser: ValueParser, sub: String },
    Mark,
    Eps,
}

#[derive(Clone, Debug)]
pub(crate) struct Production {
    pub name: String,
    pub body: NodeId,
}
