//! Runs the completion engines concurrently and merges their lists into one
//! graded, deduplicated, diversified top-`d` list.

use std::collections::HashSet;
use std::path::Path;
use std::sync::{mpsc, Arc};
use std::time::{Duration, Instant};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::atomic::{self, AtomModel, ScoringParams};
use crate::bundle::DomainBundle;
use crate::completability::{self, Completability};
use crate::error::{io_err, Error, Result};
use crate::grammar::{Grammar, ParseResult};
use crate::mpc::{self, MpcIndex};
use crate::querylog::LogCorpus;
use crate::semantics::{Completion, Grade, Source};
use crate::template::{TemplateSet, CANDIDATE_CAP};
use crate::text;

/// A completion algorithm. Implementations are read-only over immutable
/// indexes, so one instance serves concurrent callers.
pub trait CompletionEngine: Send + Sync {
    fn source(&self) -> Source;
    /// Ranked, engine-diversified completions of `prefix`. `d` is the final
    /// list size; engines may return more.
    fn complete(&self, prefix: &str, d: usize) -> Vec<Completion>;
}

pub struct MpcEngine {
    pub index: Arc<MpcIndex>,
    pub k: usize,
}

impl CompletionEngine for MpcEngine {
    fn source(&self) -> Source {
        Source::Mpc
    }

    fn complete(&self, prefix: &str, d: usize) -> Vec<Completion> {
        self.index.complete(prefix, self.k.max(d))
    }
}

pub struct AtomicEngine {
    pub model: Arc<AtomModel>,
    pub grammar: Arc<Grammar>,
    pub params: ScoringParams,
}

impl CompletionEngine for AtomicEngine {
    fn source(&self) -> Source {
        Source::Atomic
    }

    fn complete(&self, prefix: &str, d: usize) -> Vec<Completion> {
        atomic::complete_atomic(&self.model, &self.grammar, prefix, d, &self.params)
    }
}

pub struct TemplateEngine {
    pub templates: TemplateSet,
}

impl CompletionEngine for TemplateEngine {
    fn source(&self) -> Source {
        Source::Template
    }

    fn complete(&self, prefix: &str, _d: usize) -> Vec<Completion> {
        self.templates.complete(prefix, CANDIDATE_CAP)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeavePolicy {
    /// Round-robin over dtype groups within each grade tier.
    #[default]
    GradeDtype,
    /// Merged order only: grade, then source, then engine rank.
    Merged,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoordinatorConfig {
    pub algorithms: Vec<Source>,
    pub d: usize,
    /// Per-engine time budget.
    pub budget_ms: u64,
    /// Drop LOW results when any HIGH or MEDIUM result exists.
    pub grade_floor: bool,
    /// Engines consulted only when the others return nothing.
    pub fallback_only: Vec<Source>,
    pub weave: WeavePolicy,
}

impl Default for CoordinatorConfig {
    fn default() -> Self {
        CoordinatorConfig {
            algorithms: vec![Source::Mpc, Source::Atomic, Source::Template],
            d: 10,
            budget_ms: 50,
            grade_floor: true,
            fallback_only: Vec::new(),
            weave: WeavePolicy::GradeDtype,
        }
    }
}

impl CoordinatorConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        let cfg: CoordinatorConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_toml(&std::fs::read_to_string(path).map_err(io_err(path))?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Config("d must be positive".into()));
        }
        if self.budget_ms == 0 {
            return Err(Error::Config("budget_ms must be positive".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("at least one algorithm must be enabled".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Outcome {
    pub completions: Vec<Completion>,
    /// Engines that missed the budget; their results were dropped.
    pub timed_out: Vec<Source>,
}

pub struct Coordinator {
    pub cfg: CoordinatorConfig,
    engines: Vec<Arc<dyn CompletionEngine>>,
}

/// A completion tagged with where it came from.
#[derive(Clone, Debug)]
struct Tagged {
    c: Completion,
    rank: usize,
}

impl Coordinator {
    /// Engines whose source is not enabled in `cfg` are ignored.
    pub fn new(cfg: CoordinatorConfig, engines: Vec<Arc<dyn CompletionEngine>>) -> Self {
        let engines = engines.into_iter().filter(|e| cfg.algorithms.contains(&e.source())).collect();
        Coordinator { cfg, engines }
    }

    pub fn sources(&self) -> Vec<Source> {
        self.engines.iter().map(|e| e.source()).collect()
    }

    pub fn complete(&self, prefix: &str) -> Outcome {
        let (primary, fallback): (Vec<_>, Vec<_>) =
            self.engines.iter().cloned().partition(|e| !self.cfg.fallback_only.contains(&e.source()));
        let (mut lists, mut timed_out) = self.run(&primary, prefix);
        if lists.iter().all(Vec::is_empty) && !fallback.is_empty() {
            let (l, t) = self.run(&fallback, prefix);
            lists = l;
            timed_out.extend(t);
        }
        Outcome { completions: merge(&self.cfg, lists), timed_out }
    }

    fn run(&self, engines: &[Arc<dyn CompletionEngine>], prefix: &str) -> (Vec<Vec<Completion>>, Vec<Source>) {
        let d = self.cfg.d;
        if engines.len() == 1 {
            let start = Instant::now();
            let out = engines[0].complete(prefix, d);
            if start.elapsed() > Duration::from_millis(self.cfg.budget_ms) {
                return (vec![Vec::new()], vec![engines[0].source()]);
            }
            return (vec![out], Vec::new());
        }
        let (tx, rx) = mpsc::channel();
        for (i, e) in engines.iter().enumerate() {
            let (e, tx, p) = (Arc::clone(e), tx.clone(), prefix.to_string());
            // Detached so an overrunning engine cannot hold up the response.
            std::thread::spawn(move || {
                let _ = tx.send((i, e.complete(&p, d)));
            });
        }
        drop(tx);
        let deadline = Instant::now() + Duration::from_millis(self.cfg.budget_ms);
        let mut lists: Vec<Option<Vec<Completion>>> = vec![None; engines.len()];
        let mut pending = engines.len();
        while pending > 0 {
            let left = deadline.saturating_duration_since(Instant::now());
            match rx.recv_timeout(left) {
                Ok((i, out)) => {
                    lists[i] = Some(out);
                    pending -= 1;
                }
                Err(_) => break,
            }
        }
        let timed_out = lists.iter().zip(engines).filter(|(l, _)| l.is_none()).map(|(_, e)| e.source()).collect();
        (lists.into_iter().map(Option::unwrap_or_default).collect(), timed_out)
    }
}

/// Merges per-engine lists: dedup by interpretation and normalized text,
/// grade floor, weave, truncate to `d`.
pub fn merge(cfg: &CoordinatorConfig, lists: Vec<Vec<Completion>>) -> Vec<Completion> {
    let mut all: Vec<Tagged> =
        lists.into_iter().flat_map(|l| l.into_iter().enumerate().map(|(rank, c)| Tagged { c, rank })).collect();
    all.sort_by(|a, b| {
        b.c.grade.cmp(&a.c.grade).then_with(|| a.c.source.cmp(&b.c.source)).then_with(|| a.rank.cmp(&b.rank))
    });
    let mut seen_f = HashSet::new();
    let mut seen_s = HashSet::new();
    all.retain(|t| {
        let f = t.c.interpretation.key();
        let s = text::normalize_trimmed(&t.c.completion);
        if seen_f.contains(&f) || seen_s.contains(&s) {
            return false;
        }
        seen_f.insert(f);
        seen_s.insert(s);
        true
    });
    if cfg.grade_floor && all.iter().any(|t| t.c.grade > Grade::Low) {
        all.retain(|t| t.c.grade > Grade::Low);
    }
    let mut out = match cfg.weave {
        WeavePolicy::Merged => all,
        WeavePolicy::GradeDtype => weave(all),
    };
    out.truncate(cfg.d);
    out.into_iter().map(|t| t.c).collect()
}

fn intra_group(a: &Tagged, b: &Tagged) -> std::cmp::Ordering {
    b.c.score
        .total_cmp(&a.c.score)
        .then_with(|| a.c.source.cmp(&b.c.source))
        .then_with(|| a.rank.cmp(&b.rank))
        .then_with(|| a.c.completion.cmp(&b.c.completion))
}

/// Round-robin over dtype groups (in order of first appearance) within each
/// grade tier; tiers in descending grade.
fn weave(sorted: Vec<Tagged>) -> Vec<Tagged> {
    let mut out = Vec::with_capacity(sorted.len());
    let mut tiers: IndexMap<Grade, IndexMap<String, Vec<Tagged>>> = IndexMap::new();
    for t in sorted {
        tiers.entry(t.c.grade).or_default().entry(t.c.dtype.to_string()).or_default().push(t);
    }
    for (_, groups) in tiers {
        let mut groups: Vec<std::vec::IntoIter<Tagged>> = groups
            .into_values()
            .map(|mut g| {
                g.sort_by(intra_group);
                g.into_iter()
            })
            .collect();
        loop {
            let before = out.len();
            for g in &mut groups {
                out.extend(g.next());
            }
            if out.len() == before {
                break;
            }
        }
    }
    out
}

/// Everything needed to serve one domain: the grammars, the indexes built
/// from a training log, and the coordinator over them.
pub struct System {
    pub bundle: DomainBundle,
    pub mpc: Arc<MpcIndex>,
    pub atoms: Arc<AtomModel>,
    pub templates: Option<TemplateSet>,
    pub params: ScoringParams,
    pub coordinator: Coordinator,
}

impl System {
    pub fn build(bundle: DomainBundle, train: &LogCorpus, cfg: CoordinatorConfig) -> Self {
        let mpc = MpcIndex::build(train, &bundle.grammar);
        let atoms = AtomModel::build(train, &bundle.grammar);
        Self::from_parts(bundle, mpc, atoms, cfg, ScoringParams::default())
    }

    pub fn from_parts(
        bundle: DomainBundle,
        mpc: MpcIndex,
        atoms: AtomModel,
        cfg: CoordinatorConfig,
        params: ScoringParams,
    ) -> Self {
        let mpc = Arc::new(mpc);
        let atoms = Arc::new(atoms);
        let templates = bundle.templates.clone().map(TemplateSet::new);
        let mut engines: Vec<Arc<dyn CompletionEngine>> = vec![
            Arc::new(MpcEngine { index: Arc::clone(&mpc), k: mpc::DEFAULT_K }),
            Arc::new(AtomicEngine { model: Arc::clone(&atoms), grammar: Arc::clone(&bundle.grammar), params }),
        ];
        if let Some(t) = &templates {
            engines.push(Arc::new(TemplateEngine { templates: t.clone() }));
        }
        let coordinator = Coordinator::new(cfg, engines);
        System { bundle, mpc, atoms, templates, params, coordinator }
    }

    pub fn grammar(&self) -> &Grammar {
        &self.bundle.grammar
    }

    pub fn complete(&self, prefix: &str) -> Outcome {
        self.coordinator.complete(prefix)
    }

    pub fn parse(&self, q: &str) -> Vec<ParseResult> {
        self.bundle.grammar.parse(q)
    }

    pub fn completable(&self, prefix: &str) -> Completability {
        completability::completable(&self.bundle.grammar, prefix)
    }
}
