//! The grammar formalism shared by the semantic parser and the template
//! engine: full parsing, maximal-prefix decomposition, completion
//! enumeration and completability probing.

mod ast;
mod generate;
mod interp;
mod loader;
pub mod values;

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::domain::{AssetSource, Domain};
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::semantics::{Derivation, DiversificationType, Formula};
use crate::text::{self, Sep, Tokenized};

pub use ast::Action;
pub use generate::Generator;
pub use values::{DateLayout, Parsed, ValueParser};

use ast::{Node, NodeId, Production};
use interp::{Interp, Mode, St};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GrammarOptions {
    /// Production nesting limit; deeper paths are abandoned.
    pub max_depth: u32,
    /// Lexicon entries tried per trie node when extending past the input.
    pub fanout: usize,
    /// Node evaluations allowed per call.
    pub budget: usize,
}

impl Default for GrammarOptions {
    fn default() -> Self {
        GrammarOptions { max_depth: 16, fanout: 8, budget: 400_000 }
    }
}

/// A loaded, validated grammar. Immutable and shareable across threads.
#[derive(Debug)]
pub struct Grammar {
    pub(crate) nodes: Vec<Node>,
    pub(crate) prods: Vec<Production>,
    pub(crate) root: NodeId,
    pub(crate) root_name: String,
    pub(crate) domain: Arc<Domain>,
    pub(crate) opts: GrammarOptions,
    pub(crate) views: HashMap<String, Lexicon>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParseResult {
    pub derivation: Derivation,
    /// Tokens consumed from the input.
    pub consumed: usize,
}

impl ParseResult {
    pub fn formula(&self) -> Option<Formula> {
        self.derivation.canonical_formula()
    }
}

/// Split of a prefix into a fully parsed head `i_p` and unrecognized rest `r_p`.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub input: Tokenized,
    /// Number of tokens in `i_p`.
    pub m: usize,
    /// Derivation over `input.tokens[..m]`.
    pub derivation: Derivation,
}

impl Decomposition {
    pub fn ip_tokens(&self) -> Vec<&str> {
        self.input.tokens[..self.m].iter().map(|t| t.text.as_str()).collect()
    }

    /// Normalized lowercase `i_p`.
    pub fn ip_text(&self) -> String {
        text::render(self.input.tokens[..self.m].iter().map(|t| (t.sep, t.text.as_str())))
    }

    /// `i_p` with normalized spacing and typed casing.
    pub fn ip_display(&self) -> String {
        self.input.display(0..self.m)
    }

    /// Separator between `i_p` and `r_p`.
    pub fn separator(&self) -> &'static str {
        if self.m == 0 {
            ""
        } else if self.m < self.input.len() {
            self.input.tokens[self.m].sep.as_str()
        } else {
            self.input.trailing.map_or("", Sep::as_str)
        }
    }

    /// Normalized lowercase `r_p`, including any trailing separator.
    pub fn rp_text(&self) -> String {
        if self.m == self.input.len() {
            return String::new();
        }
        self.input.suffix(self.m).normalized()
    }

    pub fn rp(&self) -> Tokenized {
        if self.m == self.input.len() {
            return Tokenized::default();
        }
        self.input.suffix(self.m)
    }

    pub fn formula(&self) -> Option<Formula> {
        self.derivation.formula()
    }

    pub fn atom_count(&self) -> usize {
        self.derivation.atoms.len()
    }
}

/// Output of [`Grammar::enumerate_completions`].
#[derive(Clone, Debug, PartialEq)]
pub struct Enumerated {
    pub text: String,
    /// Canonical interpretation.
    pub formula: Formula,
    /// Type of the atom under the cursor.
    pub dtype: DiversificationType,
    /// Sum of log lexicon weights minus the number of emitted tokens.
    pub score: f64,
}

/// Outcome of a `completable` construct on a character string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CompletableOutcome {
    /// A leading part parses; the rest is left for the grammar.
    PrefixParsed {
        parsed: String,
        rest: String,
    },
    /// The whole string is a prefix of something parsable.
    IsPrefixOfParsable(String),
    Failure,
}

/// Classifies `s` for a completable construct with `parser` and `sub`.
pub fn completable_step(parser: ValueParser, sub: &str, s: &str) -> CompletableOutcome {
    let t = text::tokenize(s);
    let toks = t.texts();
    if toks.is_empty() {
        return CompletableOutcome::Failure;
    }
    if t.partial_last() && parser.viable(&toks) {
        return CompletableOutcome::IsPrefixOfParsable(sub.to_string());
    }
    let best = parser.parse_prefixes(&toks).into_iter().map(|(k, _)| k).max();
    match best {
        Some(k) if k < toks.len() || t.trailing.is_some() => CompletableOutcome::PrefixParsed {
            parsed: t.display(0..k),
            rest: if k < toks.len() { t.suffix(k).normalized() } else { String::new() },
        },
        _ => CompletableOutcome::Failure,
    }
}

fn rank_key(d: &Derivation) -> (std::cmp::Reverse<usize>, usize, String) {
    let canon = d.canonical_formula().map(|f| f.to_string()).unwrap_or_default();
    (std::cmp::Reverse(d.covered_tokens()), d.atoms.len(), canon)
}

impl Grammar {
    pub fn load(domain: Arc<Domain>, source: &AssetSource, file: &str) -> Result<Self> {
        loader::load(domain, source, file, GrammarOptions::default())
    }

    /// Loads grammar text directly; `include`s resolve against `source`.
    pub fn load_str(domain: Arc<Domain>, source: &AssetSource, name: &str, text: &str) -> Result<Self> {
        loader::load_str(domain, source, name, text, GrammarOptions::default())
    }

    pub fn with_options(mut self, opts: GrammarOptions) -> Self {
        self.opts = opts;
        self
    }

    pub fn options(&self) -> GrammarOptions {
        self.opts
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn root_name(&self) -> &str {
        &self.root_name
    }

    pub fn production_names(&self) -> Vec<&str> {
        self.prods.iter().map(|p| p.name.as_str()).collect()
    }

    /// A lexicon or view bound at load time.
    pub fn view(&self, name: &str) -> Option<&Lexicon> {
        self.views.get(name)
    }

    fn derivation(&self, t: &Tokenized, st: &St, upto: usize) -> Derivation {
        Derivation {
            tokens: t.tokens[..upto].iter().map(|x| x.text.clone()).collect(),
            atoms: st.atoms.clone(),
            connectives: st.conns.clone(),
        }
    }

    /// Parses of every prefix length, keyed by tokens consumed.
    fn prefix_parses(&self, t: &Tokenized) -> HashMap<usize, Vec<Derivation>> {
        let mut by_len: HashMap<usize, Vec<Derivation>> = HashMap::new();
        if t.is_empty() {
            return by_len;
        }
        let it = Interp::new(self, t, Mode::Parse);
        for st in it.run() {
            if st.atoms.is_empty() || st.pos == 0 {
                continue;
            }
            let d = self.derivation(t, &st, st.pos);
            let bucket = by_len.entry(st.pos).or_default();
            if !bucket.contains(&d) {
                bucket.push(d);
            }
        }
        for v in by_len.values_mut() {
            v.sort_by_cached_key(rank_key);
        }
        by_len
    }

    /// All complete parses of `query`, best first.
    pub fn parse(&self, query: &str) -> Vec<ParseResult> {
        self.parse_tokens(&text::tokenize(query))
    }

    pub fn parse_tokens(&self, t: &Tokenized) -> Vec<ParseResult> {
        let n = t.len();
        self.prefix_parses(t)
            .remove(&n)
            .unwrap_or_default()
            .into_iter()
            .map(|derivation| ParseResult { derivation, consumed: n })
            .collect()
    }

    pub fn best_parse(&self, query: &str) -> Option<ParseResult> {
        self.parse(query).into_iter().next()
    }

    pub fn parses(&self, query: &str) -> bool {
        !self.parse(query).is_empty()
    }

    /// Longest fully parsable initial token segment of `prefix`.
    pub fn decompose(&self, prefix: &str) -> Decomposition {
        self.decompose_tokens(text::tokenize(prefix))
    }

    pub fn decompose_tokens(&self, input: Tokenized) -> Decomposition {
        let mut by_len = self.prefix_parses(&input);
        let best = by_len.keys().copied().max();
        match best {
            Some(m) => {
                let derivation = by_len.remove(&m).and_then(|v| v.into_iter().next()).expect("non-empty bucket");
                Decomposition { input, m, derivation }
            }
            None => {
                let derivation = Derivation::empty(Vec::new());
                Decomposition { input, m: 0, derivation }
            }
        }
    }

    /// Moves the rightmost `steps` atoms of `i_p` back into `r_p`.
    pub fn backtrack(&self, d: &Decomposition, steps: usize) -> Result<Decomposition> {
        let atoms = d.derivation.atoms.len();
        if steps > atoms {
            return Err(Error::Backtrack { steps, atoms });
        }
        if steps == 0 {
            return Ok(d.clone());
        }
        let mut starts: Vec<usize> = d.derivation.atoms.iter().map(|a| a.span.start).collect();
        starts.sort_unstable();
        let new_m = if steps == atoms { 0 } else { starts[atoms - steps] };
        let mut by_len = HashMap::new();
        if new_m > 0 {
            let mut head = d.input.clone();
            head.tokens.truncate(new_m);
            head.trailing = Some(Sep::Space);
            by_len = self.prefix_parses(&head);
        }
        // Keep only the part of i_p that is itself a full parse.
        let m = by_len.keys().copied().filter(|&k| k <= new_m).max().unwrap_or(0);
        let derivation = match by_len.remove(&m).and_then(|v| v.into_iter().next()) {
            Some(x) => x,
            None => Derivation::empty(Vec::new()),
        };
        Ok(Decomposition { input: d.input.clone(), m, derivation })
    }

    /// Completions of `prefix` extended to the next atom boundary.
    pub fn enumerate_completions(&self, prefix: &str, limit: usize) -> Vec<Enumerated> {
        self.enumerate_tokens(&text::tokenize(prefix), limit)
    }

    pub fn enumerate_tokens(&self, t: &Tokenized, limit: usize) -> Vec<Enumerated> {
        let n = t.len();
        let it = Interp::new(self, t, Mode::Complete);
        let cursor = if t.partial_last() { n - 1 } else { n };
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for st in it.run() {
            if st.atoms.is_empty() || (st.ext.is_none() && st.pos != n) {
                continue;
            }
            let (from, emitted): (usize, &[(Sep, String)]) = match &st.ext {
                Some(e) => (e.from, &e.out),
                None => (n, &[]),
            };
            let mut s = t.display(0..from);
            for (k, (sep, tok)) in emitted.iter().enumerate() {
                if from > 0 || k > 0 {
                    s.push_str(sep.as_str());
                }
                s.push_str(tok);
            }
            let d = Derivation { tokens: Vec::new(), atoms: st.atoms.clone(), connectives: st.conns.clone() };
            let Some(formula) = d.canonical_formula() else { continue };
            let Some(at) = d.atom_at(cursor) else { continue };
            let key = (s.clone(), formula.to_string());
            if !seen.insert(key) {
                continue;
            }
            let score = st.weight - st.emitted() as f64;
            out.push(Enumerated { text: s, formula, dtype: at.atom.field.clone(), score });
        }
        out.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.text.cmp(&b.text)));
        out.truncate(limit);
        out
    }

    /// Whether some grammar path consumes all of `prefix`.
    pub fn probe(&self, prefix: &str) -> bool {
        self.probe_tokens(&text::tokenize(prefix))
    }

    pub fn probe_tokens(&self, t: &Tokenized) -> bool {
        if t.is_empty() {
            return true;
        }
        let it = Interp::new(self, t, Mode::Probe);
        it.run();
        it.hit()
    }

    pub(crate) fn root_node(&self) -> NodeId {
        self.root
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn completable_step_cases() {
        let n = ValueParser::Numeric;
        assert_eq!(completable_step(n, "...", "2"), CompletableOutcome::IsPrefixOfParsable("...".into()));
        assert_eq!(
            completable_step(n, "...", "2M u"),
            CompletableOutcome::PrefixParsed { parsed: "2M".into(), rest: "u".into() }
        );
        assert_eq!(completable_step(n, "...", "ibm's market c"), CompletableOutcome::Failure);
        assert_eq!(completable_step(n, "...", ""), CompletableOutcome::Failure);
    }
}
