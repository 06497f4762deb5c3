//! Semantically driven auto-completion for natural-language query
//! interfaces.

pub mod atomic;
pub mod bundle;
pub mod completability;
pub mod coordinator;
pub mod domain;
pub mod error;
pub mod eval;
pub mod grammar;
pub mod lexicon;
pub mod mpc;
pub mod querylog;
pub mod semantics;
pub mod snapshot;
pub mod template;
pub mod text;
pub mod trie;

pub use error::{Error, Result};
