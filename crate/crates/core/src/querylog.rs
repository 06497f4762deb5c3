//! Query logs: loading and saving, time-shift reformulation of stale dates,
//! and synthetic generation.
//!
//! Log files hold one `text<TAB>YYYY-MM-DD<TAB>frequency` record per line.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};
use crate::grammar::values::{days_in_month, render_date};
use crate::grammar::{Generator, Grammar, Parsed, ValueParser};
use crate::semantics::Value;
use crate::text;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoggedQuery {
    pub text: String,
    pub t_q: NaiveDate,
    pub frequency: u64,
}

impl LoggedQuery {
    pub fn new(text: &str, t_q: NaiveDate, frequency: u64) -> Self {
        LoggedQuery { text: text.to_string(), t_q, frequency: frequency.max(1) }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogCorpus {
    pub domain: String,
    pub queries: Vec<LoggedQuery>,
}

impl LogCorpus {
    pub fn new(domain: &str, queries: Vec<LoggedQuery>) -> Self {
        LogCorpus { domain: domain.to_string(), queries }
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn parse(domain: &str, file: &str, body: &str) -> Result<Self> {
        let mut queries = Vec::new();
        for (i, line) in body.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: String| Error::Format { file: file.to_string(), line: i + 1, msg };
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(bad(format!("expected 3 tab-separated columns, got {}", cols.len())));
            }
            if cols[0].trim().is_empty() {
                return Err(bad("empty query text".into()));
            }
            let t_q = NaiveDate::parse_from_str(cols[1].trim(), "%Y-%m-%d")
                .map_err(|e| bad(format!("bad date `{}`: {e}", cols[1].trim())))?;
            let frequency: u64 =
                cols[2].trim().parse().map_err(|_| bad(format!("bad frequency `{}`", cols[2].trim())))?;
            if frequency == 0 {
                return Err(bad("frequency must be at least 1".into()));
            }
            queries.push(LoggedQuery { text: cols[0].to_string(), t_q, frequency });
        }
        Ok(LogCorpus { domain: domain.to_string(), queries })
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        for q in &self.queries {
            let _ = writeln!(s, "{}\t{}\t{}", q.text, q.t_q.format("%Y-%m-%d"), q.frequency);
        }
        s
    }
}

pub fn load_log(path: impl AsRef<Path>) -> Result<LogCorpus> {
    let path = path.as_ref();
    let body = std::fs::read_to_string(path).map_err(io_err(path))?;
    let domain = path.file_stem().and_then(|s| s.to_str()).unwrap_or("log");
    LogCorpus::parse(domain, &path.display().to_string(), &body)
}

pub fn save_log(corpus: &LogCorpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, corpus.to_tsv()).map_err(io_err(path))
}

/// Calendar difference applied component-wise.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CalendarDelta {
    pub years: i32,
    pub months: i32,
    pub days: i32,
}

impl CalendarDelta {
    pub fn between(from: NaiveDate, to: NaiveDate) -> Self {
        CalendarDelta {
            years: to.year() - from.year(),
            months: to.month() as i32 - from.month() as i32,
            days: to.day() as i32 - from.day() as i32,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.years == 0 && self.months == 0 && self.days == 0
    }
}

/// Shifts a fully specified date by `delta`: years, then months (carrying
/// into years), then days. A day outside the target month is clamped into
/// it; the flag reports whether that happened.
pub fn shift_date(day: i32, month: i32, year: i32, delta: CalendarDelta) -> (i32, i32, i32, bool) {
    let total = (year + delta.years) * 12 + (month - 1) + delta.months;
    let y = total.div_euclid(12);
    let m = total.rem_euclid(12) + 1;
    let dim = days_in_month(y, m);
    let d = day + delta.days;
    let clamped = d < 1 || d > dim;
    (d.clamp(1, dim), m, y, clamped)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shifted {
    pub query: LoggedQuery,
    /// Some date landed outside its month and was clamped.
    pub clamped: bool,
    /// Set when the query could not be parsed and was left unchanged.
    pub warning: Option<String>,
}

/// Rewrites every fully specified date in `q` by `t_now - q.t_q`, keeping
/// each date's surface layout. The observation date becomes `t_now`.
pub fn time_shift(grammar: &Grammar, q: &LoggedQuery, t_now: NaiveDate) -> Shifted {
    let delta = CalendarDelta::between(q.t_q, t_now);
    let toks = text::tokenize(&q.text);
    let Some(parse) = grammar.parse_tokens(&toks).into_iter().next() else {
        return Shifted {
            query: q.clone(),
            clamped: false,
            warning: Some(format!("unparsable query left unchanged: {}", q.text)),
        };
    };
    let mut edits = Vec::new();
    let mut clamped = false;
    for sa in &parse.derivation.atoms {
        let Value::ExactDate { day, month, year } = sa.atom.value else { continue };
        if day < 0 || month < 0 || year < 0 {
            continue;
        }
        let Some(vs) = sa.value_span.clone() else { continue };
        let words: Vec<&str> = toks.tokens[vs.clone()].iter().map(|t| t.text.as_str()).collect();
        let Some(Parsed::Date { layout, .. }) = ValueParser::Date.parse_all(&words) else { continue };
        let (d, m, y, c) = shift_date(day, month, year, delta);
        clamped |= c;
        let first = &toks.tokens[vs.start];
        let capital = first.raw.chars().next().is_some_and(char::is_uppercase);
        let rendered = render_date(d, m, y, layout, capital);
        edits.push((first.start, toks.tokens[vs.end - 1].end, rendered));
    }
    let mut out = q.text.clone();
    edits.sort_by_key(|e| std::cmp::Reverse(e.0));
    for (s, e, r) in edits {
        out.replace_range(s..e, &r);
    }
    Shifted { query: LoggedQuery { text: out, t_q: t_now, frequency: q.frequency }, clamped, warning: None }
}

/// `n` distinct parsable queries sampled from `grammar`, with Zipf-like
/// frequencies by sampling order. Deterministic in `seed`.
pub fn synthesize(grammar: &Grammar, n: usize, seed: u64) -> LogCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gen = Generator::new(grammar);
    let base = NaiveDate::from_ymd_opt(2019, 1, 1).expect("valid date");
    let mut seen = HashSet::new();
    let mut queries = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while queries.len() < n && attempts < n.saturating_mul(200).max(1000) {
        attempts += 1;
        let Some(s) = gen.sample(&mut rng) else { continue };
        if seen.contains(&s) || !grammar.parses(&s) {
            continue;
        }
        seen.insert(s.clone());
        let rank = queries.len() + 1;
        let frequency = ((n as f64 / rank as f64).round() as u64).max(1);
        let t_q = base + chrono::Days::new(rng.gen_range(0..365));
        queries.push(LoggedQuery { text: s, t_q, frequency });
    }
    LogCorpus { domain: grammar.domain().name.clone(), queries }
}

/// Up to `n` distinct parsable variants of the queries in `base`, each with
/// every digit run replaced by a random run of the same length. Used to grow
/// a log to a large number of distinct numeric and date atoms for load
/// testing. Deterministic in `seed`.
pub fn numeric_variants(grammar: &Grammar, base: &LogCorpus, n: usize, seed: u64) -> LogCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool: Vec<&LoggedQuery> = base.queries.iter().filter(|q| q.text.bytes().any(|b| b.is_ascii_digit())).collect();
    let mut seen: HashSet<String> = base.queries.iter().map(|q| q.text.clone()).collect();
    let mut queries = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while !pool.is_empty() && queries.len() < n && attempts < n.saturating_mul(20) {
        attempts += 1;
        let q = pool[rng.gen_range(0..pool.len())];
        let mut out = String::with_capacity(q.text.len());
        let mut run = 0usize;
        for c in q.text.chars().chain(std::iter::once(' ')) {
            if c.is_ascii_digit() {
                run += 1;
                continue;
            }
            for k in 0..run {
                let lo = if k == 0 && run > 1 { 1 } else { 0 };
                out.push(char::from(b'0' + rng.gen_range(lo..10u8)));
            }
            run = 0;
            out.push(c);
        }
        out.pop();
        if seen.contains(&out) || !grammar.parses(&out) {
            continue;
        }
        seen.insert(out.clone());
        queries.push(LoggedQuery { text: out, t_q: q.t_q, frequency: rng.gen_range(1..=3) });
    }
    LogCorpus { domain: base.domain.clone(), queries }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn date(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    #[test]
    fn delta_is_componentwise() {
        let d = CalendarDelta::between(date(2018, 1, 1), date(2020, 1, 1));
        assert_eq!(d, CalendarDelta { years: 2, months: 0, days: 0 });
        assert_eq!(shift_date(30, 5, 2020, d), (30, 5, 2022, false));
        assert_eq!(shift_date(1, 4, 2018, d), (1, 4, 2020, false));
    }

    #[test]
    fn month_carry_and_clamp() {
        let d = CalendarDelta { years: 0, months: 1, days: 0 };
        assert_eq!(shift_date(31, 1, 2021, d), (28, 2, 2021, true));
        let d = CalendarDelta { years: 0, months: -2, days: 0 };
        assert_eq!(shift_date(15, 1, 2021, d), (15, 11, 2020, false));
    }

    #[test]
    fn log_round_trip_and_errors() {
        let c = LogCorpus::parse("t", "t.tsv", "a b\t2019-01-02\t3\n").unwrap();
        assert_eq!(c.queries[0].frequency, 3);
        assert_eq!(LogCorpus::parse("t", "t.tsv", &c.to_tsv()).unwrap(), c);
        let err = LogCorpus::parse("t", "t.tsv", "ok\t2019-01-02\t1\nbad line\n").unwrap_err();
        assert!(err.to_string().contains("t.tsv:2"), "{err}");
        assert!(LogCorpus::parse("t", "t.tsv", "").unwrap().is_empty());
    }
}
