//! Atom-level completion.
//!
//! Offline, every logged query is parsed and each atom occurrence is
//! recorded with its count and a left-context word vector. Online, the
//! prefix is split into a parsed head and an unrecognized tail; the tail is
//! matched against the atom trie and candidates are scored by how often
//! their contexts saw the head's words.

use std::collections::{BinaryHeap, HashMap};
use std::fmt::Write as _;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::grammar::{Decomposition, Grammar};
use crate::querylog::LogCorpus;
use crate::semantics::{
    canonicalize, rightmost_atom_type, Atom, Completion, DiversificationType, Formula, Grade, Op, Source, Value,
};
use crate::text::{self, Tokenized};
use crate::trie::RankedTrie;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomRecord {
    /// Trie key: lowercase tokens joined by single spaces.
    pub key: String,
    /// Untokenized form from the first occurrence.
    pub display: String,
    pub atom: Atom,
    pub count: u64,
    /// Words seen to the left of this atom, with counts, in first-seen order.
    pub context: IndexMap<String, u64>,
    /// Insertion order, for the diagnostic dump.
    pub first_seen: usize,
}

impl AtomRecord {
    pub fn dtype(&self) -> &DiversificationType {
        &self.atom.field
    }

    pub fn context_count(&self, w: &str) -> u64 {
        self.context.get(w).copied().unwrap_or(0)
    }
}

/// Accumulates atom records from logs and phrase lists.
#[derive(Debug, Default)]
pub struct AtomModelBuilder {
    records: IndexMap<String, AtomRecord>,
    checked: HashMap<String, bool>,
    skipped: usize,
}

impl AtomModelBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn bump(&mut self, key: String, display: String, atom: Atom, n: u64) -> &mut AtomRecord {
        let next = self.records.len();
        let r = self.records.entry(key.clone()).or_insert_with(|| AtomRecord {
            key,
            display,
            atom,
            count: 0,
            context: IndexMap::new(),
            first_seen: next,
        });
        r.count += n;
        r
    }

    /// Adds every atom occurrence of every parsable query. Counts and
    /// context increments are multiplied by the query's frequency.
    pub fn add_log(&mut self, corpus: &LogCorpus, grammar: &Grammar) {
        for q in &corpus.queries {
            let toks = text::tokenize(&q.text);
            let Some(best) = grammar.parse_tokens(&toks).into_iter().next() else {
                self.skipped += 1;
                continue;
            };
            for sa in &best.derivation.atoms {
                let key = toks.key_range(sa.span.clone());
                let display = text::render(toks.tokens[sa.span.clone()].iter().map(|t| (t.sep, t.text.as_str())));
                if !self.standalone(grammar, &key, &display, &sa.atom) {
                    continue;
                }
                let rec = self.bump(key, display, sa.atom.clone(), q.frequency);
                for t in &toks.tokens[..sa.span.start] {
                    if t.text != "," {
                        *rec.context.entry(t.text.clone()).or_insert(0) += q.frequency;
                    }
                }
            }
        }
    }

    /// Whether an atom's surface parses on its own to that atom. Parts of
    /// multi-atom phrases (the two ends of a date range) do not, and are
    /// left out of the model.
    fn standalone(&mut self, grammar: &Grammar, key: &str, display: &str, atom: &Atom) -> bool {
        if self.records.contains_key(key) {
            return true;
        }
        if let Some(&ok) = self.checked.get(key) {
            return ok;
        }
        let ok = reparses_to(grammar, display, &Formula::Atom(atom.clone()));
        self.checked.insert(key.to_string(), ok);
        ok
    }

    /// Adds one keyword atom (`field CONTAINS phrase`) per phrase.
    pub fn add_phrases(&mut self, phrases: &[(String, u64)], field: &str) {
        for (p, c) in phrases {
            let key = text::phrase_key(p);
            if key.is_empty() {
                continue;
            }
            let atom = Atom::new(field, Op::Contains, Value::Str(key.clone()));
            self.bump(key, text::normalize_trimmed(p), atom, (*c).max(1));
        }
    }

    pub fn skipped(&self) -> usize {
        self.skipped
    }

    pub fn finish(self) -> AtomModel {
        AtomModel::from_records(self.records.into_values().collect(), self.skipped)
    }
}

/// Parses a `phrase<TAB>count` list.
pub fn parse_phrase_list(file: &str, body: &str) -> crate::Result<Vec<(String, u64)>> {
    let mut out = Vec::new();
    for (i, line) in body.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: &str| crate::Error::Format { file: file.to_string(), line: i + 1, msg: msg.into() };
        let (p, c) = line.split_once('\t').ok_or_else(|| bad("expected phrase<TAB>count"))?;
        let c: u64 = c.trim().parse().map_err(|_| bad("bad count"))?;
        out.push((p.trim().to_string(), c));
    }
    Ok(out)
}

/// Atom records ranked by count (desc, then key), with the atom trie `T_A`.
/// Record ids are ranks, so id order is the count-then-key tie order.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(from = "StoredModel", into = "StoredModel")]
pub struct AtomModel {
    pub records: Vec<AtomRecord>,
    trie: RankedTrie,
    by_key: HashMap<String, u32>,
    /// Distinct dtypes, and each record's index into them.
    dtypes: Vec<DiversificationType>,
    dtype_ix: Vec<u32>,
    /// Context word to the records that saw it, in id order, with counts.
    postings: HashMap<String, Vec<(u32, u64)>>,
    /// Queries skipped at build time because they did not parse.
    pub skipped: usize,
}

#[derive(Serialize, Deserialize)]
struct StoredModel {
    records: Vec<AtomRecord>,
    skipped: usize,
}

impl From<StoredModel> for AtomModel {
    fn from(s: StoredModel) -> Self {
        AtomModel::from_records(s.records, s.skipped)
    }
}

impl From<AtomModel> for StoredModel {
    fn from(m: AtomModel) -> Self {
        StoredModel { records: m.records, skipped: m.skipped }
    }
}

impl AtomModel {
    pub fn build(corpus: &LogCorpus, grammar: &Grammar) -> Self {
        let mut b = AtomModelBuilder::new();
        b.add_log(corpus, grammar);
        if b.skipped > 0 {
            log::warn!("atom model: skipped {} unparsable queries", b.skipped);
        }
        b.finish()
    }

    pub fn from_records(mut records: Vec<AtomRecord>, skipped: usize) -> Self {
        records.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.key.cmp(&b.key)));
        let trie = RankedTrie::build(records.iter().enumerate().map(|(i, r)| (r.key.as_str(), i as u32)));
        let by_key = records.iter().enumerate().map(|(i, r)| (r.key.clone(), i as u32)).collect();
        let mut dtypes: Vec<DiversificationType> = Vec::new();
        let mut slot: HashMap<&DiversificationType, u32> = HashMap::new();
        let mut dtype_ix = Vec::with_capacity(records.len());
        let mut postings: HashMap<String, Vec<(u32, u64)>> = HashMap::new();
        for (i, r) in records.iter().enumerate() {
            let ix = *slot.entry(r.dtype()).or_insert_with(|| {
                dtypes.push(r.dtype().clone());
                dtypes.len() as u32 - 1
            });
            dtype_ix.push(ix);
            for (w, &c) in &r.context {
                postings.entry(w.clone()).or_default().push((i as u32, c));
            }
        }
        AtomModel { records, trie, by_key, dtypes, dtype_ix, postings, skipped }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, surface: &str) -> Option<&AtomRecord> {
        self.by_key.get(&text::phrase_key(surface)).map(|&i| &self.records[i as usize])
    }

    /// Ranked record ids whose key starts with `key`.
    pub fn matches(&self, key: &str) -> &[u32] {
        self.trie.prefix(key)
    }

    /// Number of atoms whose key strictly extends `key`.
    pub fn strict_extensions(&self, key: &str) -> usize {
        match self.trie.find(key) {
            Some(n) => self.trie.subtree_len(n) - self.trie.exact(n).len(),
            None => 0,
        }
    }

    pub fn vocabulary(&self) -> Vec<&str> {
        let mut v: Vec<&str> =
            self.records.iter().flat_map(|r| r.key.split(' ').chain(r.context.keys().map(String::as_str))).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Diagnostic dump in a pseudo-JSON shape, records in first-seen order.
    pub fn dump(&self) -> String {
        let mut recs: Vec<&AtomRecord> = self.records.iter().collect();
        recs.sort_by_key(|r| r.first_seen);
        let mut s = String::from("{");
        for (i, r) in recs.iter().enumerate() {
            if i > 0 {
                s.push_str(",\n ");
            }
            let _ = writeln!(s, "{:?} := {{", r.display);
            let _ = writeln!(s, "   semantics := {:?},", semantics_text(&r.atom));
            let _ = writeln!(s, "   count := {},", r.count);
            s.push_str("   context := {");
            for (j, (w, c)) in r.context.iter().enumerate() {
                if j > 0 {
                    s.push_str(", ");
                }
                let _ = write!(s, "{w:?} := {c}");
            }
            s.push_str("}\n }");
        }
        s.push_str("\n}\n");
        s
    }
}

/// `FIELD = VALUE` with spaced operator.
pub fn semantics_text(a: &Atom) -> String {
    let body = format!("{} {} {}", a.field, a.op.symbol(), a.value);
    if a.negated {
        format!("NOT({body})")
    } else {
        body
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountTransform {
    /// `ln(1 + c)`
    #[default]
    Log1p,
    Identity,
}

impl CountTransform {
    pub fn apply(self, c: u64) -> f64 {
        match self {
            CountTransform::Log1p => (c as f64).ln_1p(),
            CountTransform::Identity => c as f64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoringParams {
    /// `f`, applied to each context count.
    pub transform: CountTransform,
    /// `h(x) = scale * x`, applied to the summed score.
    pub scale: f64,
    /// Trie matches kept before scoring.
    pub n_max: usize,
    /// Backtrack one more atom while the match count grows by at least this factor.
    pub backtrack_ratio: f64,
    /// A fully parsed prefix is reconsidered when its last atom is a strict
    /// prefix of more than this many atoms.
    pub ambiguity_threshold: usize,
    /// Skip candidates whose output does not re-parse to its interpretation.
    pub verify: bool,
    /// A dtype bucket is dropped after this many consecutive candidates
    /// fail verification. 0 means never.
    pub patience: usize,
}

impl Default for ScoringParams {
    fn default() -> Self {
        ScoringParams {
            transform: CountTransform::Log1p,
            scale: 1.0,
            n_max: 100_000,
            backtrack_ratio: 10.0,
            ambiguity_threshold: 0,
            verify: true,
            patience: 8,
        }
    }
}

/// Context score of `rec` given head words `ip`.
pub fn score(ip: &[&str], rec: &AtomRecord, p: &ScoringParams) -> f64 {
    let s: f64 = ip.iter().map(|w| p.transform.apply(rec.context_count(w))).sum();
    // An empty sum is -0.0.
    p.scale * s + 0.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Joiner {
    Space,
    And,
    Comma,
    Or,
}

/// What the tail `r_p` matches against: a trie key plus the connective
/// stripped from its front.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailQuery {
    pub key: String,
    pub joiner: Joiner,
}

/// Trie key for the tail of `d`, or `None` when the tail is empty and the
/// user is still typing the last parsed token.
pub fn tail_query(d: &Decomposition) -> Option<TailQuery> {
    let rp = d.rp();
    if rp.is_empty() {
        return d.input.trailing.map(|_| TailQuery { key: String::new(), joiner: Joiner::Space });
    }
    let mut joiner = Joiner::Space;
    let mut toks: &[text::Token] = &rp.tokens;
    let complete_first = toks.len() > 1 || rp.trailing.is_some();
    if d.m > 0 && complete_first {
        joiner = match toks[0].text.as_str() {
            "or" => Joiner::Or,
            "and" => Joiner::And,
            "," => Joiner::Comma,
            _ => Joiner::Space,
        };
        if joiner != Joiner::Space {
            toks = &toks[1..];
        }
    }
    let mut key = text::key_of(toks.iter().map(|t| t.text.as_str()));
    if !toks.is_empty() && rp.trailing.is_some() {
        key.push(' ');
    }
    Some(TailQuery { key, joiner })
}

fn match_count(model: &AtomModel, d: &Decomposition) -> usize {
    tail_query(d).map_or(0, |q| model.matches(&q.key).len())
}

/// Applies the backtracking heuristics to a decomposition.
pub fn backtrack_heuristics(
    grammar: &Grammar,
    model: &AtomModel,
    dec: Decomposition,
    p: &ScoringParams,
) -> Decomposition {
    let atoms = dec.atom_count();
    if atoms == 0 {
        return dec;
    }
    let n = dec.input.len();
    if dec.m == n {
        // Fully parsed while the last token is still being typed: the last
        // atom may be the start of a longer one.
        if dec.input.trailing.is_some() {
            return dec;
        }
        let last = dec.derivation.atoms.iter().max_by_key(|a| a.span.end).expect("atoms > 0");
        let key = dec.input.key_range(last.span.clone());
        if model.strict_extensions(&key) <= p.ambiguity_threshold {
            return dec;
        }
        for steps in (1..=atoms).rev() {
            if let Ok(b) = grammar.backtrack(&dec, steps) {
                if b.m < dec.m && match_count(model, &b) > 0 {
                    return b;
                }
            }
        }
        return dec;
    }
    let mut cur = dec;
    let mut c0 = match_count(model, &cur);
    while cur.atom_count() > 0 {
        let Ok(next) = grammar.backtrack(&cur, 1) else { break };
        if next.m >= cur.m {
            break;
        }
        let c1 = match_count(model, &next);
        if c1 > 0 && c1 as f64 >= p.backtrack_ratio * c0 as f64 {
            cur = next;
            c0 = c1;
        } else {
            break;
        }
    }
    cur
}

/// Candidate ids surviving the trie match, truncation and dtype filter,
/// in rank order.
pub fn candidate_ids(
    model: &AtomModel,
    grammar: &Grammar,
    d: &Decomposition,
    q: &TailQuery,
    p: &ScoringParams,
) -> Vec<u32> {
    let blocked = match q.joiner {
        Joiner::Or => None,
        _ => rightmost_atom_type(&d.derivation).filter(|t| !grammar.domain().juxtaposition_allowed(t)),
    };
    let matched = model.matches(&q.key);
    let matched = &matched[..matched.len().min(p.n_max)];
    match blocked.and_then(|t| model.dtypes.iter().position(|x| *x == t)) {
        Some(b) => matched.iter().copied().filter(|&id| model.dtype_ix[id as usize] != b as u32).collect(),
        None => matched.to_vec(),
    }
}

fn joiner_text(j: Joiner) -> &'static str {
    match j {
        Joiner::Space => " ",
        Joiner::And => " and ",
        Joiner::Comma => ", ",
        Joiner::Or => " or ",
    }
}

/// Completion text and canonical interpretation of `rec` appended to `i_p`.
pub fn render(d: &Decomposition, q: &TailQuery, rec: &AtomRecord) -> (String, Formula) {
    let atom = Formula::Atom(rec.atom.clone());
    if d.m == 0 {
        return (rec.display.clone(), atom);
    }
    let mut s = d.ip_display();
    s.push_str(joiner_text(q.joiner));
    s.push_str(&rec.display);
    let head = d.formula().expect("m > 0 implies atoms");
    let f = match q.joiner {
        Joiner::Or => head.or(atom),
        _ => head.and(atom),
    };
    (s, canonicalize(&f))
}

/// Whether `text` parses to exactly `formula`.
pub fn reparses_to(grammar: &Grammar, text: &str, formula: &Formula) -> bool {
    grammar.best_parse(text).and_then(|p| p.formula()).as_ref() == Some(formula)
}

/// Whether `i_p` followed by the joiner can still be completed at all. When
/// it cannot, no candidate passes verification.
pub fn head_viable(grammar: &Grammar, d: &Decomposition, q: &TailQuery) -> bool {
    if d.m == 0 {
        return true;
    }
    let mut s = d.ip_display();
    s.push_str(joiner_text(q.joiner));
    grammar.probe(&s)
}

/// Scores of `ids`, indexed like `ids`. Sums run over `ip` in order, so
/// they equal [`score`] bit for bit.
fn scores(model: &AtomModel, ip: &[&str], ids: &[u32], p: &ScoringParams) -> Vec<f64> {
    if ids.len() < 4096 {
        return ids.iter().map(|&id| score(ip, &model.records[id as usize], p)).collect();
    }
    let mut dense = vec![0.0f64; model.records.len()];
    for w in ip {
        for &(id, c) in model.postings.get(*w).map(Vec::as_slice).unwrap_or_default() {
            dense[id as usize] += p.transform.apply(c);
        }
    }
    ids.iter().map(|&id| p.scale * dense[id as usize] + 0.0).collect()
}

/// Score descending, then id ascending (count descending, then key).
#[derive(Clone, Copy, Debug)]
struct Entry {
    score: f64,
    id: u32,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    /// Greater is better, for the max-heap.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.score.total_cmp(&other.score).then_with(|| other.id.cmp(&self.id))
    }
}

/// One dtype's candidates, popped best first, with the next verified one
/// held back.
struct Bucket {
    heap: BinaryHeap<Entry>,
    head: Option<Ranked>,
    failed: usize,
}

impl Bucket {
    fn peek(&mut self, patience: usize, check: &mut impl FnMut(Entry) -> Option<Ranked>) -> Option<&Ranked> {
        while self.head.is_none() {
            if patience > 0 && self.failed >= patience {
                self.heap.clear();
            }
            let e = self.heap.pop()?;
            self.head = check(e);
            self.failed = if self.head.is_some() { 0 } else { self.failed + 1 };
        }
        self.head.as_ref()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ranked {
    pub id: u32,
    pub score: f64,
    pub text: String,
    pub formula: Formula,
}

/// Scores the candidates, buckets them by dtype, orders buckets by their
/// best member and weaves them round-robin to `k` results. With
/// `p.verify`, candidates whose output does not re-parse to its
/// interpretation are skipped as if never matched, and a bucket is given up
/// after `p.patience` such candidates in a row.
pub fn rank(
    model: &AtomModel,
    grammar: &Grammar,
    d: &Decomposition,
    q: &TailQuery,
    k: usize,
    p: &ScoringParams,
) -> Vec<Ranked> {
    let ids = candidate_ids(model, grammar, d, q, p);
    if ids.is_empty() || k == 0 || (p.verify && !head_viable(grammar, d, q)) {
        return Vec::new();
    }
    let ip = d.ip_tokens();
    let sc = scores(model, &ip, &ids, p);
    let mut slot = vec![usize::MAX; model.dtypes.len()];
    let mut groups: Vec<Vec<Entry>> = Vec::new();
    for (&id, &score) in ids.iter().zip(&sc) {
        let ix = model.dtype_ix[id as usize] as usize;
        if slot[ix] == usize::MAX {
            slot[ix] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[ix]].push(Entry { score, id });
    }
    // Candidates sharing a first word share a viability probe.
    let mut head = d.ip_display();
    head.push_str(joiner_text(q.joiner));
    let mut viable: HashMap<&str, bool> = HashMap::new();
    let mut check = |e: Entry| {
        let rec = &model.records[e.id as usize];
        if p.verify && d.m > 0 {
            let first = rec.display.split(' ').next().unwrap_or_default();
            let ok = *viable.entry(first).or_insert_with(|| grammar.probe(&format!("{head}{first} ")));
            if !ok {
                return None;
            }
        }
        let (text, formula) = render(d, q, rec);
        (!p.verify || reparses_to(grammar, &text, &formula)).then_some(Ranked {
            id: e.id,
            score: e.score,
            text,
            formula,
        })
    };
    let mut lists: Vec<Bucket> =
        groups.into_iter().map(|g| Bucket { heap: BinaryHeap::from(g), head: None, failed: 0 }).collect();
    let patience = if p.verify { p.patience } else { 0 };
    lists.retain_mut(|b| b.peek(patience, &mut check).is_some());
    let lead = |b: &Bucket| {
        let h = b.head.as_ref().expect("peeked");
        Entry { score: h.score, id: h.id }
    };
    lists.sort_by_key(|b| std::cmp::Reverse(lead(b)));
    let mut out = Vec::with_capacity(k);
    'weave: loop {
        let mut any = false;
        for b in &mut lists {
            if out.len() == k {
                break 'weave;
            }
            if b.peek(patience, &mut check).is_none() {
                continue;
            }
            out.push(b.head.take().expect("peeked"));
            any = true;
        }
        if !any {
            break;
        }
    }
    out
}

/// Decomposition after backtracking, with its tail query.
pub fn analyze(
    grammar: &Grammar,
    model: &AtomModel,
    t: Tokenized,
    p: &ScoringParams,
) -> Option<(Decomposition, TailQuery)> {
    if t.is_empty() {
        return None;
    }
    let dec = backtrack_heuristics(grammar, model, grammar.decompose_tokens(t), p);
    let q = tail_query(&dec)?;
    Some((dec, q))
}

/// Top `k` atomic completions of `prefix`.
pub fn complete_atomic(
    model: &AtomModel,
    grammar: &Grammar,
    prefix: &str,
    k: usize,
    p: &ScoringParams,
) -> Vec<Completion> {
    let Some((d, q)) = analyze(grammar, model, text::tokenize(prefix), p) else { return Vec::new() };
    rank(model, grammar, &d, &q, k, p)
        .into_iter()
        .map(|r| Completion {
            completion: r.text,
            interpretation: r.formula,
            dtype: model.records[r.id as usize].dtype().clone(),
            grade: if d.m == 0 || r.score > 0.0 { Grade::High } else { Grade::Low },
            score: r.score,
            source: Source::Atomic,
        })
        .collect()
}
