//! Trie-backed lexicons and their derived views.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::Rng;

use crate::domain::{Domain, LexiconFormat, LexiconSpec, Target};
use crate::error::{Error, Result};
use crate::semantics::{Sym, ValueKind};
use crate::text::{self, Sep};
use crate::trie::RankedTrie;

#[derive(Clone, Debug, PartialEq)]
pub struct LexEntry {
    /// Normalized display form (`non-tech`).
    pub surface: String,
    pub tokens: Vec<String>,
    pub seps: Vec<Sep>,
    /// Space-joined tokens.
    pub key: String,
    pub target: Target,
    pub tags: Vec<Sym>,
    pub weight: f64,
}

impl LexEntry {
    pub fn new(surface: &str, target: Target, tags: Vec<Sym>, weight: f64) -> Self {
        let t = text::tokenize(surface);
        LexEntry {
            surface: t.normalized().trim_end().to_string(),
            key: text::key_of(t.tokens.iter().map(|x| x.text.as_str())),
            seps: t.tokens.iter().map(|x| x.sep).collect(),
            tokens: t.tokens.into_iter().map(|x| x.text).collect(),
            target,
            tags,
            weight,
        }
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.iter().any(|t| t.as_str() == tag)
    }

    /// Semantic type of a value entry.
    pub fn value_type(&self) -> Option<&Sym> {
        match &self.target {
            Target::Value { ty, .. } => Some(ty),
            _ => None,
        }
    }
}

pub(crate) fn parse_source(spec: &LexiconSpec, domain: &Domain) -> Result<Vec<LexEntry>> {
    let mut out = Vec::new();
    for (i, line) in spec.text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: String| Error::Format { file: spec.path.clone(), line: lineno, msg };
        let cols: Vec<&str> = line.split('\t').collect();
        match spec.format {
            LexiconFormat::Tsv => {
                if cols.len() != 4 {
                    return Err(bad(format!("expected 4 tab-separated columns, got {}", cols.len())));
                }
                let surface = cols[0].trim();
                if text::tokenize(surface).is_empty() {
                    return Err(bad("empty surface".into()));
                }
                let target = domain
                    .resolve(cols[1].trim())
                    .ok_or_else(|| bad(format!("unresolvable target `{}`", cols[1].trim())))?;
                let tags = cols[2].split(',').map(str::trim).filter(|t| !t.is_empty()).map(Sym::new).collect();
                let weight = parse_weight(cols[3]).ok_or_else(|| bad("bad weight".into()))?;
                out.push(LexEntry::new(surface, target, tags, weight));
            }
            LexiconFormat::Phrases => {
                if cols.len() != 2 {
                    return Err(bad(format!("expected 2 tab-separated columns, got {}", cols.len())));
                }
                if domain.keyword_field.is_none() {
                    return Err(bad("phrase lexicons need a keyword_field".into()));
                }
                let surface = cols[0].trim();
                if text::tokenize(surface).is_empty() {
                    return Err(bad("empty phrase".into()));
                }
                let weight = parse_weight(cols[1]).ok_or_else(|| bad("bad count".into()))?;
                out.push(LexEntry::new(surface, Target::Keyword, vec![Sym::new("phrase")], weight));
            }
        }
    }
    Ok(out)
}

fn parse_weight(s: &str) -> Option<f64> {
    let w: f64 = s.trim().parse().ok()?;
    (w.is_finite() && w >= 0.0).then_some(w)
}

/// An immutable lexicon. Views share entries with their source.
#[derive(Clone)]
pub struct Lexicon {
    name: String,
    entries: Arc<Vec<Arc<LexEntry>>>,
    trie: Arc<RankedTrie>,
    cumulative: Arc<OnceLock<Vec<f64>>>,
}

impl fmt::Debug for Lexicon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Lexicon({}, {} entries)", self.name, self.entries.len())
    }
}

fn rank_order(a: &LexEntry, b: &LexEntry) -> std::cmp::Ordering {
    b.weight
        .total_cmp(&a.weight)
        .then_with(|| a.key.cmp(&b.key))
        .then_with(|| a.target.kind_name().cmp(b.target.kind_name()))
        .then_with(|| a.target.id().cmp(&b.target.id()))
}

impl Lexicon {
    pub fn new(name: &str, mut entries: Vec<Arc<LexEntry>>) -> Self {
        entries.sort_by(|a, b| rank_order(a, b));
        let trie = RankedTrie::build(entries.iter().enumerate().map(|(i, e)| (e.key.as_str(), i as u32)));
        Lexicon {
            name: name.to_string(),
            entries: Arc::new(entries),
            trie: Arc::new(trie),
            cumulative: Arc::new(OnceLock::new()),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in rank order (weight descending, then lexicographic).
    pub fn entries(&self) -> &[Arc<LexEntry>] {
        &self.entries
    }

    pub fn entry(&self, id: u32) -> &LexEntry {
        &self.entries[id as usize]
    }

    pub fn trie(&self) -> &RankedTrie {
        &self.trie
    }

    /// Entries whose surface starts with `s` at the character level.
    pub fn prefix_match(&self, s: &str, limit: usize) -> Vec<&LexEntry> {
        let key = text::tokenize(s).key();
        self.trie.prefix(&key).iter().take(limit).map(|&i| self.entry(i)).collect()
    }

    /// Draws an entry with probability proportional to its weight (uniform
    /// when all weights are zero).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<&LexEntry> {
        if self.entries.is_empty() {
            return None;
        }
        let cum = self.cumulative.get_or_init(|| {
            let mut acc = 0.0;
            self.entries
                .iter()
                .map(|e| {
                    acc += e.weight;
                    acc
                })
                .collect()
        });
        let total = *cum.last().unwrap_or(&0.0);
        if total <= 0.0 {
            return Some(self.entry(rng.gen_range(0..self.entries.len()) as u32));
        }
        let x = rng.gen_range(0.0..total);
        let i = cum.partition_point(|&c| c <= x).min(self.entries.len() - 1);
        Some(&self.entries[i])
    }

    /// A view restricted to entries satisfying `pred`.
    pub fn derive_view(&self, name: &str, pred: impl Fn(&LexEntry) -> bool) -> Lexicon {
        Lexicon::new(name, self.entries.iter().filter(|e| pred(e)).cloned().collect())
    }

    /// View holding only values of semantic type `ty`.
    pub fn sub_lexicon_by_type(&self, domain: &Domain, ty: &str) -> Result<Lexicon> {
        let ty = Sym::new(ty);
        if !domain.has_type(&ty) {
            return Err(Error::UnknownType(ty.to_string()));
        }
        Ok(self.derive_view(&format!("{}[{ty}]", self.name), |e| e.value_type() == Some(&ty)))
    }

    /// One sub-lexicon per semantic type that occurs in this lexicon.
    pub fn partition_by_type(&self) -> HashMap<Sym, Lexicon> {
        let mut groups: HashMap<Sym, Vec<Arc<LexEntry>>> = HashMap::new();
        for e in self.entries.iter() {
            if let Some(ty) = e.value_type() {
                groups.entry(ty.clone()).or_default().push(e.clone());
            }
        }
        groups
            .into_iter()
            .map(|(ty, es)| {
                let name = format!("{}[{ty}]", self.name);
                (ty, Lexicon::new(&name, es))
            })
            .collect()
    }
}

/// Condition in a `view` declaration.
#[derive(Clone, Debug, PartialEq)]
pub enum ViewCond {
    Tag(String, bool),
    Type(String, bool),
    Kind(String, bool),
    FieldKind(ValueKind, bool),
}

impl ViewCond {
    pub fn holds(&self, e: &LexEntry, domain: &Domain) -> bool {
        match self {
            ViewCond::Tag(t, want) => e.has_tag(t) == *want,
            ViewCond::Type(t, want) => (e.value_type().map(Sym::as_str) == Some(t)) == *want,
            ViewCond::Kind(k, want) => (e.target.kind_name() == k) == *want,
            ViewCond::FieldKind(k, want) => {
                let is = match &e.target {
                    Target::Field(f) => domain.field(f).map(|f| f.value_kind) == Some(*k),
                    _ => false,
                };
                is == *want
            }
        }
    }
}
