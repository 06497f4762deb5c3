//! Random walks over a grammar, used to synthesize query logs.

use rand::Rng;

use crate::domain::Target;
use crate::lexicon::Lexicon;
use crate::semantics::{Sym, ValueKind};
use crate::text::{self, Sep};

use super::ast::{Action, Constrained, Node, NodeId};
use super::values::ValueParser;
use super::Grammar;

const MONTHS: [&str; 12] = [
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
];
const NUMBER_WORDS: [&str; 5] = ["two", "three", "five", "ten", "twenty"];

#[derive(Default)]
struct Walk {
    out: Vec<(Sep, String)>,
    field: Option<Sym>,
    last_field: Option<Sym>,
}

/// Samples sentences from a grammar: alternatives uniformly, lexicon entries
/// by weight.
pub struct Generator<'g> {
    g: &'g Grammar,
    /// Probability of one more Kleene repetition.
    pub repeat: f64,
    /// Probability an optional part is present.
    pub optional: f64,
}

impl<'g> Generator<'g> {
    pub fn new(g: &'g Grammar) -> Self {
        Generator { g, repeat: 0.35, optional: 0.4 }
    }

    /// One sentence, or `None` when the walk hit a dead end.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<String> {
        let mut w = Walk::default();
        if !self.walk(self.g.root_node(), rng, &mut w, 0) || w.out.is_empty() {
            return None;
        }
        Some(text::render(w.out.iter().map(|(s, t)| (*s, t.as_str()))))
    }

    fn push(w: &mut Walk, tokens: &[String], seps: &[Sep]) {
        for (i, t) in tokens.iter().enumerate() {
            let sep = if t == "," {
                Sep::None
            } else if i == 0 {
                Sep::Space
            } else {
                seps[i]
            };
            w.out.push((sep, t.clone()));
        }
    }

    fn walk<R: Rng + ?Sized>(&self, id: NodeId, rng: &mut R, w: &mut Walk, depth: u32) -> bool {
        match &self.g.nodes[id as usize] {
            Node::Eps | Node::CompatValue | Node::CompatUnit => true,
            Node::Mark => {
                w.last_field = w.field.take();
                true
            }
            Node::Lit { toks, seps, actions } => {
                Self::push(w, toks, seps);
                for a in actions {
                    match a {
                        Action::Field(f) => w.field = Some(f.clone()),
                        Action::SameField => w.field = w.last_field.clone(),
                        _ => {}
                    }
                }
                true
            }
            Node::Lex { lex, constrained } => {
                let view = match (constrained, &w.field) {
                    (Some(c), Some(f)) => match self.constrained_view(c, f) {
                        Some(v) => v,
                        None => return false,
                    },
                    _ => lex,
                };
                let Some(e) = view.sample(rng) else { return false };
                if let Target::Field(f) = &e.target {
                    w.field = Some(f.clone());
                }
                Self::push(w, &e.tokens, &e.seps);
                true
            }
            Node::Seq { items, atomic } => {
                if *atomic {
                    w.field = None;
                }
                items.iter().all(|&i| self.walk(i, rng, w, depth))
            }
            Node::Alt(alts) => {
                let pick = alts[rng.gen_range(0..alts.len())];
                self.walk(pick, rng, w, depth)
            }
            Node::Opt(inner) => !rng.gen_bool(self.optional) || self.walk(*inner, rng, w, depth),
            Node::Ref(p) => depth < self.g.opts.max_depth && self.walk(self.g.prods[*p].body, rng, w, depth + 1),
            Node::Kleene { item, sep, min } => {
                let mut reps = *min;
                while reps < min + 3 && rng.gen_bool(self.repeat) {
                    reps += 1;
                }
                for i in 0..reps {
                    if i > 0 && !self.walk(*sep, rng, w, depth) {
                        return false;
                    }
                    if !self.walk(*item, rng, w, depth) {
                        return false;
                    }
                }
                true
            }
            Node::Completable { parser, .. } => {
                // A count of temporal units is a whole number.
                let whole = w.field.as_ref().and_then(|f| self.g.domain.field(f)).map(|f| f.value_kind)
                    == Some(ValueKind::Date);
                let s = sample_value(*parser, whole, rng);
                let t = text::tokenize(&s);
                for (i, tok) in t.tokens.into_iter().enumerate() {
                    let sep = if tok.text == "," {
                        Sep::None
                    } else if i == 0 {
                        Sep::Space
                    } else {
                        tok.sep
                    };
                    w.out.push((sep, tok.text));
                }
                true
            }
        }
    }

    fn constrained_view<'a>(&'a self, c: &'a Constrained, field: &Sym) -> Option<&'a Lexicon> {
        match c {
            Constrained::Values(by_type) => by_type.get(self.g.domain.field_types.get(field)?),
            Constrained::Units(by_field) => by_field.get(field),
        }
    }
}

fn sample_value<R: Rng + ?Sized>(parser: ValueParser, whole: bool, rng: &mut R) -> String {
    match parser {
        ValueParser::Numeric if whole => rng.gen_range(1..=30).to_string(),
        ValueParser::Numeric => match rng.gen_range(0..10) {
            0..=5 => rng.gen_range(1..=30).to_string(),
            6 => format!("{}.5", rng.gen_range(1..=9)),
            7 => format!("{}m", rng.gen_range(1..=900)),
            8 => format!("{}b", rng.gen_range(1..=50)),
            _ => NUMBER_WORDS[rng.gen_range(0..NUMBER_WORDS.len())].to_string(),
        },
        ValueParser::Date => {
            let year = rng.gen_range(2015..=2035);
            let month = MONTHS[rng.gen_range(0..12)];
            match rng.gen_range(0..4) {
                0 | 1 => year.to_string(),
                2 => format!("{month} {year}"),
                _ => format!("{month} {}, {year}", rng.gen_range(1..=28)),
            }
        }
    }
}
