//! Predictiveness (mean reciprocal rank under several match predicates) and
//! latency evaluation.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::coordinator::System;
use crate::error::{Error, Result};
use crate::grammar::Grammar;
use crate::querylog::{LogCorpus, LoggedQuery};
use crate::semantics::{canonicalize, Atom, Completion, Formula};
use crate::text;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Predicate {
    Str,
    Pstr,
    Bow,
    Pbow,
    Sem,
    Psem,
}

impl Predicate {
    pub const ALL: [Predicate; 6] =
        [Predicate::Str, Predicate::Pstr, Predicate::Bow, Predicate::Pbow, Predicate::Sem, Predicate::Psem];

    pub fn name(self) -> &'static str {
        match self {
            Predicate::Str => "STR",
            Predicate::Pstr => "PSTR",
            Predicate::Bow => "BOW",
            Predicate::Pbow => "PBOW",
            Predicate::Sem => "SEM",
            Predicate::Psem => "PSEM",
        }
    }

    pub fn parse(s: &str) -> Option<Predicate> {
        Predicate::ALL.into_iter().find(|p| p.name().eq_ignore_ascii_case(s.trim()))
    }

    /// The partial counterpart of a full predicate.
    pub fn partial(self) -> Predicate {
        match self {
            Predicate::Str | Predicate::Pstr => Predicate::Pstr,
            Predicate::Bow | Predicate::Pbow => Predicate::Pbow,
            Predicate::Sem | Predicate::Psem => Predicate::Psem,
        }
    }
}

/// One side of a comparison, with derived forms computed once.
#[derive(Clone, Debug)]
pub struct Subject {
    pub text: String,
    pub words: Vec<String>,
    pub formula: Option<Formula>,
    pub atoms: Vec<Atom>,
}

impl Subject {
    pub fn new(s: &str, formula: Option<Formula>) -> Self {
        let formula = formula.map(|f| canonicalize(&f));
        let mut atoms: Vec<Atom> = formula.iter().flat_map(|f| f.atoms().into_iter().cloned()).collect();
        atoms.sort();
        atoms.dedup();
        Subject { text: text::normalize_trimmed(s), words: text::bag_of_words(s), formula, atoms }
    }

    pub fn parsed(s: &str, grammar: &Grammar) -> Self {
        Self::new(s, grammar.best_parse(s).and_then(|p| p.formula()))
    }

    pub fn of_completion(c: &Completion) -> Self {
        Self::new(&c.completion, Some(c.interpretation.clone()))
    }
}

fn sub_multiset(small: &[String], big: &[String]) -> bool {
    // Both sorted.
    let mut j = 0;
    for w in small {
        while j < big.len() && big[j] < *w {
            j += 1;
        }
        if j == big.len() || big[j] != *w {
            return false;
        }
        j += 1;
    }
    true
}

/// Whether completion `c` matches the intended query `q` under `pred`.
pub fn matches(q: &Subject, c: &Subject, pred: Predicate) -> bool {
    match pred {
        Predicate::Str => q.text == c.text,
        Predicate::Pstr => q.text.starts_with(&c.text),
        Predicate::Bow => q.words == c.words,
        Predicate::Pbow => sub_multiset(&c.words, &q.words),
        Predicate::Sem => q.formula.is_some() && q.formula == c.formula,
        Predicate::Psem => {
            q.formula.is_some() && c.formula.is_some() && c.atoms.iter().all(|a| q.atoms.binary_search(a).is_ok())
        }
    }
}

/// String-level match, parsing both sides when the predicate is semantic.
pub fn match_strings(q: &str, c: &str, pred: Predicate, grammar: &Grammar) -> bool {
    matches(&Subject::parsed(q, grammar), &Subject::parsed(c, grammar), pred)
}

/// `1/i` for the first matching position `i` (1-based), 0 when none match.
pub fn reciprocal_rank(q: &Subject, list: &[Subject], pred: Predicate) -> f64 {
    list.iter().position(|c| matches(q, c, pred)).map_or(0.0, |i| 1.0 / (i + 1) as f64)
}

/// Nearest-rank percentile of an ascending sample.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = ((p / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub n: usize,
    pub mean_ms: f64,
    pub p50_ms: f64,
    pub p90_ms: f64,
    pub p95_ms: f64,
    pub p99_ms: f64,
    pub max_ms: f64,
}

impl LatencyStats {
    pub fn from_samples(mut ms: Vec<f64>) -> Self {
        ms.sort_by(f64::total_cmp);
        let n = ms.len();
        LatencyStats {
            n,
            mean_ms: if n == 0 { 0.0 } else { ms.iter().sum::<f64>() / n as f64 },
            p50_ms: percentile(&ms, 50.0),
            p90_ms: percentile(&ms, 90.0),
            p95_ms: percentile(&ms, 95.0),
            p99_ms: percentile(&ms, 99.0),
            max_ms: ms.last().copied().unwrap_or(0.0),
        }
    }

    pub fn table(&self) -> String {
        format!(
            "{:>8} {:>8} {:>8} {:>8} {:>8}\n{:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>8}\n",
            "mean", "P90", "P95", "P99", "n", self.mean_ms, self.p90_ms, self.p95_ms, self.p99_ms, self.n
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub min_prefix: usize,
    pub k: usize,
    pub predicates: Vec<Predicate>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { min_prefix: 3, k: 10, predicates: Predicate::ALL.to_vec() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredicateScore {
    pub predicate: Predicate,
    /// Mean RR over all prefixes of all queries.
    pub mrr: f64,
    /// Mean over queries of each query's mean RR.
    pub mrr_per_query: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub queries: usize,
    pub prefixes: usize,
    pub scores: Vec<PredicateScore>,
    /// Prefix length in characters → predicate name → MRR.
    pub by_prefix_length: BTreeMap<usize, BTreeMap<String, f64>>,
    pub latency: LatencyStats,
}

impl EvalReport {
    pub fn mrr(&self, p: Predicate) -> Option<f64> {
        self.scores.iter().find(|s| s.predicate == p).map(|s| s.mrr)
    }

    /// Rows STR/BOW/SEM with their partial counterparts alongside.
    pub fn table(&self) -> String {
        let mut s = format!("{:<6} {:>8} {:>8}\n", "", "MRR", "partial");
        let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
        for p in [Predicate::Str, Predicate::Bow, Predicate::Sem] {
            let (full, part) = (self.mrr(p), self.mrr(p.partial()));
            if full.is_some() || part.is_some() {
                let _ = writeln!(s, "{:<6} {:>8} {:>8}", p.name(), cell(full), cell(part));
            }
        }
        s
    }
}

/// Test queries whose normalized text does not occur in `train`.
pub fn disjoint_test(train: &LogCorpus, test: &LogCorpus) -> Vec<LoggedQuery> {
    let seen: HashSet<String> = train.queries.iter().map(|q| text::normalize_trimmed(&q.text)).collect();
    let mut out_seen = HashSet::new();
    test.queries
        .iter()
        .filter(|q| {
            let n = text::normalize_trimmed(&q.text);
            !seen.contains(&n) && out_seen.insert(n)
        })
        .cloned()
        .collect()
}

/// Character prefixes of the trimmed `q` with at least `min` characters.
pub fn prefixes(q: &str, min: usize) -> Vec<&str> {
    let q = q.trim();
    let mut out: Vec<&str> = q
        .char_indices()
        .skip(1)
        .map(|(i, _)| &q[..i])
        .chain(std::iter::once(q))
        .filter(|p| p.chars().count() >= min)
        .collect();
    out.dedup();
    out
}

/// Evaluates `system` (already trained) on `test`.
pub fn evaluate_system(system: &System, test: &[LoggedQuery], cfg: &EvalConfig) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::Eval("empty test set".into()));
    }
    if cfg.min_prefix == 0 || cfg.k == 0 {
        return Err(Error::Eval("min_prefix and k must be positive".into()));
    }
    let preds = &cfg.predicates;
    let mut total = vec![0.0; preds.len()];
    let mut per_query = vec![0.0; preds.len()];
    let mut by_len: BTreeMap<usize, (usize, Vec<f64>)> = BTreeMap::new();
    let mut latencies = Vec::new();
    let mut n_prefixes = 0usize;
    let mut n_queries = 0usize;
    for q in test {
        let subject = Subject::parsed(&q.text, system.grammar());
        let ps = prefixes(&q.text, cfg.min_prefix);
        if ps.is_empty() {
            continue;
        }
        n_queries += 1;
        let mut q_sum = vec![0.0; preds.len()];
        for p in &ps {
            let start = Instant::now();
            let out = system.complete(p);
            latencies.push(start.elapsed().as_secs_f64() * 1e3);
            let list: Vec<Subject> = out.completions.iter().take(cfg.k).map(Subject::of_completion).collect();
            let len_entry = by_len.entry(p.chars().count()).or_insert_with(|| (0, vec![0.0; preds.len()]));
            len_entry.0 += 1;
            for (i, &pred) in preds.iter().enumerate() {
                let rr = reciprocal_rank(&subject, &list, pred);
                total[i] += rr;
                q_sum[i] += rr;
                len_entry.1[i] += rr;
            }
            n_prefixes += 1;
        }
        for i in 0..preds.len() {
            per_query[i] += q_sum[i] / ps.len() as f64;
        }
    }
    if n_prefixes == 0 {
        return Err(Error::Eval("no test query is long enough for min_prefix".into()));
    }
    let scores = preds
        .iter()
        .enumerate()
        .map(|(i, &predicate)| PredicateScore {
            predicate,
            mrr: total[i] / n_prefixes as f64,
            mrr_per_query: per_query[i] / n_queries as f64,
        })
        .collect();
    let by_prefix_length = by_len
        .into_iter()
        .map(|(len, (n, sums))| {
            let m = preds.iter().zip(sums).map(|(p, s)| (p.name().to_string(), s / n as f64)).collect();
            (len, m)
        })
        .collect();
    Ok(EvalReport {
        queries: n_queries,
        prefixes: n_prefixes,
        scores,
        by_prefix_length,
        latency: LatencyStats::from_samples(latencies),
    })
}
