mod common;

use chrono::{Datelike, NaiveDate};
use proptest::prelude::*;
use semcomplete_core::querylog::*;
use semcomplete_core::semantics::Value;

use common::*;

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

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

#[test]
fn may_2020_moves_to_may_2022() {
    let b = bonds();
    let q = LoggedQuery::new("bonds maturing between April 1, 2018 and May 30, 2020", date(2018, 1, 1), 1);
    let s = time_shift(&b.grammar, &q, date(2020, 1, 1));
    assert_eq!(s.query.text, "bonds maturing between April 1, 2020 and May 30, 2022");
    assert_eq!(s.query.t_q, date(2020, 1, 1));
    assert!(!s.clamped && s.warning.is_none());
}

#[test]
fn half_year_shift_against_chrono() {
    let b = bonds();
    let (t_q, t_now) = (date(2019, 1, 1), date(2019, 7, 1));
    let q = LoggedQuery::new("bonds maturing between March 1, 2019 and March 1, 2020", t_q, 1);
    let s = time_shift(&b.grammar, &q, t_now);
    let fmt = |d: NaiveDate| format!("{} {}, {}", MONTHS[d.month0() as usize], d.day(), d.year());
    let months = chrono::Months::new(6);
    let expected =
        format!("bonds maturing between {} and {}", fmt(date(2019, 3, 1) + months), fmt(date(2020, 3, 1) + months));
    assert_eq!(s.query.text, expected);
    assert_eq!(s.query.text, "bonds maturing between September 1, 2019 and September 1, 2020");
}

#[test]
fn zero_delta_is_identity() {
    let b = bonds();
    let q = LoggedQuery::new("bonds maturing on May 30, 2020", date(2019, 4, 4), 2);
    let s = time_shift(&b.grammar, &q, q.t_q);
    assert_eq!(s.query, q);
}

#[test]
fn unparsable_queries_are_kept_with_a_warning() {
    let b = bonds();
    let q = LoggedQuery::new("xyzzy 2020", date(2019, 4, 4), 1);
    let s = time_shift(&b.grammar, &q, date(2021, 1, 1));
    assert_eq!(s.query.text, q.text);
    assert!(s.warning.is_some());
}

#[test]
fn running_log_fixture() {
    let b = bonds();
    let log = running_log(&b);
    assert_eq!(log.len(), 2);
    assert_eq!(log.queries[0].text, "ibm bonds maturing in 2020");
    assert_eq!(log.queries[1].text, "bullet bonds with yield > 2 pct");
}

#[test]
fn save_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let b = bonds();
    let log = synthesize(&b.grammar, 50, 1);
    let path = dir.path().join("log.tsv");
    save_log(&log, &path).unwrap();
    let back = load_log(&path).unwrap();
    assert_eq!(back.queries, log.queries);
    std::fs::write(&path, "").unwrap();
    assert!(load_log(&path).unwrap().is_empty());
}

#[test]
fn synthesis_is_deterministic_and_parsable() {
    let b = bonds();
    let a = synthesize(&b.grammar, 2, 42);
    assert_eq!(a.len(), 2);
    assert_eq!(a, synthesize(&b.grammar, 2, 42));
    let many = synthesize(&b.grammar, 300, 7);
    assert_eq!(many.len(), 300);
    assert!(many.queries.iter().all(|q| b.grammar.parses(&q.text)));
}

fn months_of(y: i32, m: i32) -> i32 {
    y * 12 + m - 1
}

proptest! {
    /// Shifting keeps the year/month/day offset from the observation date,
    /// except that a clamped day lands on the first or last of its month.
    #[test]
    fn shift_preserves_componentwise_offsets(
        q in 0i64..20_000, now in 0i64..20_000,
        y in 1990i32..2060, m in 1i32..=12, d in 1i32..=31,
    ) {
        let base = date(1980, 1, 1);
        let t_q = base + chrono::Days::new(q as u64);
        let t_now = base + chrono::Days::new(now as u64);
        let d = d.min(semcomplete_core::grammar::values::days_in_month(y, m));
        let delta = CalendarDelta::between(t_q, t_now);
        let (d2, m2, y2, clamped) = shift_date(d, m, y, delta);
        prop_assert!(NaiveDate::from_ymd_opt(y2, m2 as u32, d2 as u32).is_some());
        prop_assert_eq!(
            months_of(y2, m2) - months_of(t_now.year(), t_now.month() as i32),
            months_of(y, m) - months_of(t_q.year(), t_q.month() as i32)
        );
        if clamped {
            let last = semcomplete_core::grammar::values::days_in_month(y2, m2);
            prop_assert!(d2 == 1 || d2 == last);
        } else {
            prop_assert_eq!(d2 - t_now.day() as i32, d - t_q.day() as i32);
        }
    }

    /// Rewriting a rendered date in a query agrees with `shift_date`.
    #[test]
    fn time_shift_rewrites_rendered_dates(
        q in 0u64..5000, now in 0u64..5000, y in 2000i32..2040, m in 1usize..=12, d in 1i32..=28,
    ) {
        let b = bonds();
        let t_q = date(2010, 1, 1) + chrono::Days::new(q);
        let t_now = date(2010, 1, 1) + chrono::Days::new(now);
        let text = format!("bonds maturing on {} {d}, {y}", MONTHS[m - 1]);
        let s = time_shift(&b.grammar, &LoggedQuery::new(&text, t_q, 1), t_now);
        let (d2, m2, y2, clamped) = shift_date(d, m as i32, y, CalendarDelta::between(t_q, t_now));
        prop_assert_eq!(s.clamped, clamped);
        let f = b.grammar.best_parse(&s.query.text).unwrap().formula().unwrap();
        let got = f.atoms().iter().find_map(|a| match a.value {
            Value::ExactDate { day, month, year } => Some((day, month, year)),
            _ => None,
        });
        prop_assert_eq!(got, Some((d2, m2, y2)));
    }
}
