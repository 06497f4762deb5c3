//! All-paths grammar interpreter.
//!
//! Every node maps one state to the list of states it can reach. Three modes
//! share the walk:
//!
//! * `Parse` matches complete tokens only; callers pick accepting states by
//!   position (full parse or longest parsable prefix).
//! * `Complete` treats the last token as a character prefix and, once the
//!   input runs out, extends along the grammar until the next `mark`.
//! * `Probe` answers whether any path consumes the whole input.

use std::cell::Cell;
use std::ops::Range;

use crate::domain::Target;
use crate::lexicon::{LexEntry, Lexicon};
use crate::semantics::{Atom, Connective, Op, SpannedAtom, Sym, Value, ValueKind};
use crate::text::{Sep, Tokenized};

use super::ast::{Action, Constrained, Node, NodeId};
use super::values::Parsed;
use super::Grammar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Mode {
    Parse,
    Complete,
    Probe,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Draft {
    field: Option<Sym>,
    op: Option<Op>,
    value: Option<Sym>,
    number: Option<f64>,
    date: Option<(i32, i32, i32)>,
    unit: Option<Sym>,
    keyword: Option<String>,
    negated: bool,
    past: bool,
    start: usize,
    value_span: Option<Range<usize>>,
}

impl Draft {
    fn at(start: usize) -> Self {
        Draft { start, ..Draft::default() }
    }
}

/// Extension emitted past the end of the input.
#[derive(Clone, Debug)]
pub(crate) struct Ext {
    /// Input token index the extension replaces from.
    pub from: usize,
    pub out: Vec<(Sep, String)>,
}

#[derive(Clone, Debug)]
pub(crate) struct St {
    pub pos: usize,
    /// Position in output tokens (differs from `pos` only while extending).
    pub opos: usize,
    draft: Draft,
    pub atoms: Vec<SpannedAtom>,
    pub conns: Vec<Connective>,
    pending: Connective,
    pub ext: Option<Ext>,
    pub stop: bool,
    pub weight: f64,
}

impl St {
    pub fn new() -> Self {
        St {
            pos: 0,
            opos: 0,
            draft: Draft::default(),
            atoms: Vec::new(),
            conns: Vec::new(),
            pending: Connective::And,
            ext: None,
            stop: false,
            weight: 0.0,
        }
    }

    pub fn emitted(&self) -> usize {
        self.ext.as_ref().map_or(0, |e| e.out.len())
    }
}

pub(crate) struct Interp<'a> {
    g: &'a Grammar,
    inp: &'a Tokenized,
    n: usize,
    partial: bool,
    mode: Mode,
    fanout: usize,
    steps: Cell<usize>,
    hit: Cell<bool>,
}

impl<'a> Interp<'a> {
    pub fn new(g: &'a Grammar, inp: &'a Tokenized, mode: Mode) -> Self {
        let partial = mode != Mode::Parse && inp.partial_last();
        Interp {
            g,
            inp,
            n: inp.len(),
            partial,
            mode,
            fanout: g.opts.fanout,
            steps: Cell::new(0),
            hit: Cell::new(false),
        }
    }

    pub fn run(&self) -> Vec<St> {
        self.eval(self.g.root, St::new(), 0)
    }

    pub fn hit(&self) -> bool {
        self.hit.get()
    }

    fn tok(&self, i: usize) -> &str {
        &self.inp.tokens[i].text
    }

    fn signal(&self) {
        self.hit.set(true);
    }

    fn eval(&self, id: NodeId, st: St, depth: u32) -> Vec<St> {
        if self.hit.get() {
            return Vec::new();
        }
        if self.mode == Mode::Probe && st.pos == self.n {
            self.signal();
            return Vec::new();
        }
        let steps = self.steps.get() + 1;
        self.steps.set(steps);
        if steps > self.g.opts.budget {
            return Vec::new();
        }
        // The completion reached its atom boundary; the rest of the path is implied.
        if st.stop {
            return vec![st];
        }
        match &self.g.nodes[id as usize] {
            Node::Eps => vec![st],
            Node::Mark => self.finish_atom(st).into_iter().collect(),
            Node::CompatValue | Node::CompatUnit => vec![st],
            Node::Lit { toks, seps, actions } => {
                let Some(mut s) = self.consume(&st, toks, seps, 0.0) else { return Vec::new() };
                for a in actions {
                    if !self.apply_action(&mut s, a) {
                        return Vec::new();
                    }
                }
                vec![s]
            }
            Node::Lex { lex, constrained } => self.eval_lex(lex, constrained.as_ref(), st),
            Node::Seq { items, atomic } => {
                let mut cur = vec![st];
                if *atomic {
                    for s in &mut cur {
                        s.draft = Draft::at(s.opos);
                    }
                }
                for &item in items {
                    let mut next = Vec::new();
                    for s in cur {
                        next.extend(self.eval(item, s, depth));
                    }
                    if next.is_empty() {
                        return next;
                    }
                    cur = next;
                }
                cur
            }
            Node::Alt(alts) => {
                let mut out = Vec::new();
                for &a in alts {
                    out.extend(self.eval(a, st.clone(), depth));
                }
                out
            }
            Node::Opt(inner) => {
                let mut out = vec![st.clone()];
                out.extend(self.eval(*inner, st, depth));
                out
            }
            Node::Ref(p) => {
                if depth >= self.g.opts.max_depth {
                    return Vec::new();
                }
                self.eval(self.g.prods[*p].body, st, depth + 1)
            }
            Node::Kleene { item, sep, min } => self.eval_kleene(*item, *sep, *min, st, depth),
            Node::Completable { parser, sub } => self.eval_completable(*parser, sub, st),
        }
    }

    fn eval_kleene(&self, item: NodeId, sep: NodeId, min: usize, st: St, depth: u32) -> Vec<St> {
        let mut results = Vec::new();
        if min == 0 {
            results.push(st.clone());
        }
        let mut frontier = self.eval(item, st, depth);
        let mut reps = 1;
        loop {
            results.extend(frontier.iter().cloned());
            if reps > self.n + 2 {
                break;
            }
            let mut next = Vec::new();
            for s in frontier {
                // Once extending, a repetition may not start again.
                if s.ext.is_some() || s.stop {
                    continue;
                }
                for s2 in self.eval(sep, s.clone(), depth) {
                    for s3 in self.eval(item, s2, depth) {
                        if s3.pos > s.pos || s3.opos > s.opos {
                            next.push(s3);
                        }
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
            reps += 1;
        }
        results
    }

    fn boundary_sep(&self, tok: &str, j: usize, seps: &[Sep]) -> Sep {
        if tok == "," {
            Sep::None
        } else if j > 0 {
            seps[j]
        } else if self.inp.trailing == Some(Sep::Hyphen) {
            Sep::Hyphen
        } else {
            Sep::Space
        }
    }

    /// Matches `toks` at the state's position, extending past the input in
    /// completion mode.
    fn consume(&self, st: &St, toks: &[String], seps: &[Sep], weight: f64) -> Option<St> {
        let mut s = st.clone();
        for (j, t) in toks.iter().enumerate() {
            if let Some(ext) = &mut s.ext {
                if s.stop {
                    return None;
                }
                let sep = if t == "," {
                    Sep::None
                } else if j == 0 {
                    Sep::Space
                } else {
                    seps[j]
                };
                ext.out.push((sep, t.clone()));
                s.opos += 1;
                continue;
            }
            let i = s.pos;
            if i < self.n {
                let typed = self.tok(i);
                if t == typed {
                    s.pos += 1;
                    s.opos += 1;
                    continue;
                }
                if self.partial && i + 1 == self.n && t.starts_with(typed) {
                    if self.mode == Mode::Probe {
                        self.signal();
                        return None;
                    }
                    let tk = &self.inp.tokens[i];
                    let head = format!("{}{}", tk.raw, &t[typed.len()..]);
                    s.ext = Some(Ext { from: i, out: vec![(tk.sep, head)] });
                    s.pos = self.n;
                    s.opos += 1;
                    continue;
                }
                return None;
            }
            match self.mode {
                Mode::Parse => return None,
                Mode::Probe => {
                    self.signal();
                    return None;
                }
                Mode::Complete => {
                    let sep = self.boundary_sep(t, j, seps);
                    s.ext = Some(Ext { from: self.n, out: vec![(sep, t.clone())] });
                    s.opos += 1;
                }
            }
        }
        s.weight += weight;
        Some(s)
    }

    fn pick_view<'l>(&self, lex: &'l Lexicon, c: Option<&'l Constrained>, st: &St) -> Option<&'l Lexicon> {
        let (Some(c), Some(field)) = (c, st.draft.field.as_ref()) else { return Some(lex) };
        let d = &self.g.domain;
        match c {
            Constrained::Values(by_type) => {
                let ty = d.field_types.get(field)?;
                by_type.get(ty)
            }
            Constrained::Units(by_field) => by_field.get(field),
        }
    }

    fn take_entry(&self, st: &St, e: &LexEntry, out: &mut Vec<St>) {
        let w = (1.0 + e.weight).ln();
        if let Some(mut s) = self.consume(st, &e.tokens, &e.seps, w) {
            if self.apply_entry(&mut s, e) {
                out.push(s);
            }
        }
    }

    fn eval_lex(&self, lex: &Lexicon, c: Option<&Constrained>, st: St) -> Vec<St> {
        let mut out = Vec::new();
        let Some(view) = self.pick_view(lex, c, &st) else { return out };
        let trie = view.trie();
        if view.is_empty() {
            return out;
        }
        if st.ext.is_some() || st.pos == self.n {
            if self.mode == Mode::Complete && !st.stop {
                for &id in trie.ranked(trie.root()).iter().take(self.fanout) {
                    self.take_entry(&st, view.entry(id), &mut out);
                }
            }
            return out;
        }
        let mut node = trie.root();
        for k in st.pos..self.n {
            if k > st.pos {
                match trie.child(node, b' ') {
                    Some(nd) => node = nd,
                    None => break,
                }
            }
            match trie.walk(node, self.tok(k).as_bytes()) {
                Some(nd) => node = nd,
                None => break,
            }
            let last = k + 1 == self.n;
            if last && self.partial {
                let exact = trie.exact(node);
                for &id in exact {
                    self.take_entry(&st, view.entry(id), &mut out);
                }
                if self.mode == Mode::Probe {
                    self.signal();
                    return out;
                }
                for &id in trie.ranked(node).iter().filter(|id| !exact.contains(id)).take(self.fanout) {
                    self.take_entry(&st, view.entry(id), &mut out);
                }
                break;
            }
            for &id in trie.exact(node) {
                self.take_entry(&st, view.entry(id), &mut out);
            }
            if last && self.mode != Mode::Parse {
                if let Some(sp) = trie.child(node, b' ') {
                    if self.mode == Mode::Probe {
                        self.signal();
                        return out;
                    }
                    for &id in trie.ranked(sp).iter().take(self.fanout) {
                        self.take_entry(&st, view.entry(id), &mut out);
                    }
                }
            }
        }
        out
    }

    fn eval_completable(&self, parser: super::values::ValueParser, sub: &str, st: St) -> Vec<St> {
        let mut out = Vec::new();
        if st.ext.is_some() || st.pos >= self.n {
            return out;
        }
        let pos = st.pos;
        let rest: Vec<&str> = (pos..self.n).map(|i| self.tok(i)).collect();
        let limit = if self.partial { rest.len() - 1 } else { rest.len() };
        for (k, v) in parser.parse_prefixes(&rest[..limit]) {
            if let Some(s) = self.assign(&st, v, k) {
                out.push(s);
            }
        }
        if !sub.is_empty() {
            for k in 1..=limit.min(4) {
                let Some(stripped) = rest[k - 1].strip_suffix(sub) else { continue };
                let mut toks = rest[..k].to_vec();
                toks[k - 1] = stripped;
                if let Some(v) = parser.parse_all(&toks) {
                    if let Some(s) = self.assign(&st, v, k) {
                        out.push(s);
                    }
                }
            }
        }
        if !self.partial && self.mode == Mode::Probe && parser.open(&rest) {
            self.signal();
            return out;
        }
        if self.partial && parser.viable(&rest) {
            match self.mode {
                Mode::Probe => {
                    self.signal();
                    return out;
                }
                Mode::Complete => {
                    if let Some(v) = parser.parse_all(&rest) {
                        let mut s = st.clone();
                        let k = rest.len();
                        let last = &self.inp.tokens[self.n - 1];
                        s.ext = Some(Ext { from: self.n - 1, out: vec![(last.sep, format!("{}{sub}", last.raw))] });
                        let start = s.opos;
                        s.pos = self.n;
                        s.opos += k;
                        if set_value(&mut s.draft, v, start..s.opos) {
                            out.push(s);
                        }
                    }
                }
                Mode::Parse => {}
            }
        }
        out
    }

    fn assign(&self, st: &St, v: Parsed, k: usize) -> Option<St> {
        let mut s = st.clone();
        let start = s.opos;
        s.pos += k;
        s.opos += k;
        set_value(&mut s.draft, v, start..s.opos).then_some(s)
    }

    fn apply_entry(&self, s: &mut St, e: &LexEntry) -> bool {
        let d = &mut s.draft;
        match &e.target {
            Target::Field(f) => set_once(&mut d.field, f.clone()),
            Target::Value { id, .. } => set_once(&mut d.value, id.clone()),
            Target::Unit(u) => set_once(&mut d.unit, u.clone()),
            Target::Keyword => {
                if d.keyword.is_some() {
                    return false;
                }
                d.keyword = Some(e.surface.clone());
                true
            }
        }
    }

    fn apply_action(&self, s: &mut St, a: &Action) -> bool {
        match a {
            Action::Op(op) => {
                s.draft.op = Some(*op);
                true
            }
            Action::Not => {
                s.draft.negated = !s.draft.negated;
                true
            }
            Action::Or => {
                s.pending = Connective::Or;
                true
            }
            Action::And => {
                s.pending = Connective::And;
                true
            }
            Action::Field(f) => set_once(&mut s.draft.field, f.clone()),
            Action::Value(v) => set_once(&mut s.draft.value, v.clone()),
            Action::Unit(u) => set_once(&mut s.draft.unit, u.clone()),
            Action::SameField => match s.atoms.last() {
                Some(a) => set_once(&mut s.draft.field, a.atom.field.clone()),
                None => false,
            },
            Action::Past => {
                s.draft.past = true;
                true
            }
        }
    }

    fn finish_atom(&self, mut st: St) -> Option<St> {
        let dom = &self.g.domain;
        let d = &st.draft;
        if d.start >= st.opos {
            return None;
        }
        let field = d
            .field
            .clone()
            .or_else(|| {
                let ty = dom.value_type(d.value.as_ref()?)?;
                Some(dom.types.get(ty)?.default_field.clone())
            })
            .or_else(|| d.keyword.as_ref().and(dom.keyword_field.clone()))?;
        let fd = dom.field(&field)?;
        let value = match fd.value_kind {
            ValueKind::Enum => {
                if d.number.is_some() || d.date.is_some() || d.unit.is_some() || d.keyword.is_some() {
                    return None;
                }
                Value::Enum(d.value.clone()?)
            }
            ValueKind::Numeric => {
                if d.value.is_some() || d.date.is_some() || d.keyword.is_some() {
                    return None;
                }
                Value::Numeric { magnitude: d.number?, unit: d.unit.clone() }
            }
            ValueKind::Date => {
                if d.value.is_some() || d.keyword.is_some() {
                    return None;
                }
                if let Some((day, month, year)) = d.date {
                    if d.number.is_some() || d.unit.is_some() {
                        return None;
                    }
                    Value::ExactDate { day, month, year }
                } else {
                    let n = d.number?;
                    let unit = dom.temporal(d.unit.as_ref()?)?;
                    if n.fract() != 0.0 || n < 0.0 {
                        return None;
                    }
                    let n = if d.past { -(n as i64) } else { n as i64 };
                    Value::RelativeTime { n, unit, anchor: dom.anchor.clone() }
                }
            }
            ValueKind::String => {
                if d.value.is_some() || d.number.is_some() || d.unit.is_some() {
                    return None;
                }
                Value::Str(d.keyword.clone()?)
            }
            ValueKind::Boolean => return None,
        };
        let default_op = if fd.value_kind == ValueKind::String { Op::Contains } else { Op::Eq };
        let atom = Atom { field, op: d.op.unwrap_or(default_op), value, negated: d.negated };
        if !atom.is_well_formed(fd) {
            return None;
        }
        let span = d.start..st.opos;
        let value_span = d.value_span.clone();
        st.atoms.push(SpannedAtom { atom, span, value_span });
        st.conns.push(st.pending);
        st.pending = Connective::And;
        st.draft = Draft::at(st.opos);
        if st.ext.is_some() {
            st.stop = true;
        }
        Some(st)
    }
}

fn set_once(slot: &mut Option<Sym>, v: Sym) -> bool {
    match slot {
        Some(x) => *x == v,
        None => {
            *slot = Some(v);
            true
        }
    }
}

fn set_value(d: &mut Draft, v: Parsed, span: Range<usize>) -> bool {
    match v {
        Parsed::Number(x) => {
            if d.number.is_some() || d.date.is_some() {
                return false;
            }
            d.number = Some(x);
        }
        Parsed::Date { day, month, year, .. } => {
            if d.number.is_some() || d.date.is_some() {
                return false;
            }
            d.date = Some((day, month, year));
        }
    }
    d.value_span = Some(span);
    true
}
