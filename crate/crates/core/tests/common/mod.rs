#![allow(dead_code)]

use semcomplete_core::bundle::DomainBundle;
use semcomplete_core::querylog::LogCorpus;
use semcomplete_core::semantics::{Atom, Formula, Op, Value};

pub fn bonds() -> DomainBundle {
    DomainBundle::open("bonds").expect("bundled bonds domain")
}

pub fn news() -> DomainBundle {
    DomainBundle::open("news").expect("bundled news domain")
}

/// The two-query running-example log.
pub fn running_log(b: &DomainBundle) -> LogCorpus {
    LogCorpus::parse("bonds", "running_log.tsv", &b.read_asset("running_log.tsv").unwrap()).unwrap()
}

pub fn headlines(b: &DomainBundle) -> LogCorpus {
    LogCorpus::parse("news", "headlines.tsv", &b.read_asset("headlines.tsv").unwrap()).unwrap()
}

pub fn eq(field: &str, value: &str) -> Formula {
    Formula::Atom(Atom::eq(field, value))
}

pub fn year(field: &str, y: i32) -> Formula {
    Formula::Atom(Atom::new(field, Op::Eq, Value::ExactDate { day: -1, month: -1, year: y }))
}

pub mod oracle {
    use semcomplete_core::atomic::{analyze, render, reparses_to, AtomModel, Joiner, ScoringParams};
    use semcomplete_core::grammar::Grammar;
    use semcomplete_core::semantics::rightmost_atom_type;
    use semcomplete_core::text;

    /// Brute-force atomic ranking: scores every atom in the model, then
    /// applies the same filters, verification and weave by linear scans.
    pub fn atomic(model: &AtomModel, g: &Grammar, prefix: &str, k: usize, p: &ScoringParams) -> Vec<(String, f64)> {
        let Some((d, q)) = analyze(g, model, text::tokenize(prefix), p) else { return Vec::new() };
        let ip = d.ip_tokens();
        let blocked = match q.joiner {
            Joiner::Or => None,
            _ => rightmost_atom_type(&d.derivation).filter(|t| !g.domain().juxtaposition_allowed(t)),
        };
        let mut ranked: Vec<usize> = (0..model.records.len()).collect();
        ranked.sort_by(|&a, &b| {
            let (x, y) = (&model.records[a], &model.records[b]);
            y.count.cmp(&x.count).then_with(|| x.key.cmp(&y.key))
        });
        let cands: Vec<usize> = ranked
            .into_iter()
            .filter(|&i| model.records[i].key.starts_with(&q.key))
            .take(p.n_max)
            .filter(|&i| blocked.as_ref() != Some(&model.records[i].atom.field))
            .collect();
        let f = |c: u64| match p.transform {
            semcomplete_core::atomic::CountTransform::Log1p => (c as f64).ln_1p(),
            semcomplete_core::atomic::CountTransform::Identity => c as f64,
        };
        let mut groups: Vec<(String, Vec<(usize, f64)>)> = Vec::new();
        for i in cands {
            let r = &model.records[i];
            let mut s = 0.0;
            for w in &ip {
                s += f(r.context.get(*w).copied().unwrap_or(0));
            }
            let s = p.scale * s + 0.0;
            let dt = r.atom.field.to_string();
            match groups.iter_mut().find(|(t, _)| *t == dt) {
                Some((_, v)) => v.push((i, s)),
                None => groups.push((dt, vec![(i, s)])),
            }
        }
        let mut lists: Vec<Vec<(String, f64, usize)>> = Vec::new();
        for (_, mut v) in groups {
            v.sort_by(|a, b| {
                let (x, y) = (&model.records[a.0], &model.records[b.0]);
                b.1.total_cmp(&a.1).then_with(|| y.count.cmp(&x.count)).then_with(|| x.key.cmp(&y.key))
            });
            let mut kept = Vec::new();
            let mut failed = 0;
            for (i, s) in v {
                if p.verify && p.patience > 0 && failed >= p.patience {
                    break;
                }
                let (t, form) = render(&d, &q, &model.records[i]);
                if !p.verify || reparses_to(g, &t, &form) {
                    kept.push((t, s, i));
                    failed = 0;
                } else {
                    failed += 1;
                }
            }
            if !kept.is_empty() {
                lists.push(kept);
            }
        }
        lists.sort_by(|a, b| {
            let (x, y) = (&model.records[a[0].2], &model.records[b[0].2]);
            b[0].1.total_cmp(&a[0].1).then_with(|| y.count.cmp(&x.count)).then_with(|| x.key.cmp(&y.key))
        });
        let mut out = Vec::new();
        let mut round = 0;
        while out.len() < k {
            let mut any = false;
            for l in &lists {
                if out.len() == k {
                    break;
                }
                if let Some((t, s, _)) = l.get(round) {
                    out.push((t.clone(), *s));
                    any = true;
                }
            }
            if !any {
                break;
            }
            round += 1;
        }
        out
    }
}
