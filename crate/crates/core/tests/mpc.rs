mod common;

use chrono::NaiveDate;
use proptest::prelude::*;
use semcomplete_core::mpc::MpcIndex;
use semcomplete_core::querylog::{synthesize, LogCorpus, LoggedQuery};
use semcomplete_core::semantics::{canonicalize, Grade, Source};
use semcomplete_core::{snapshot, text};

use common::*;

fn day() -> NaiveDate {
    NaiveDate::from_ymd_opt(2019, 1, 1).unwrap()
}

#[test]
fn running_example_index() {
    let b = bonds();
    let idx = MpcIndex::build(&running_log(&b), &b.grammar);
    assert_eq!(idx.len(), 2);
    let ibm = idx.entries.iter().find(|e| e.text == "ibm bonds maturing in 2020").unwrap();
    assert_eq!(ibm.formula, canonicalize(&eq("ISSUING_COMPANY", "COMPANY_IBM").and(year("MATURITY_DATE", 2020))));

    let got = idx.complete("ib", 10);
    assert_eq!(got.len(), 1);
    assert_eq!(got[0].completion, "ibm bonds maturing in 2020");
    assert_eq!((got[0].grade, got[0].source), (Grade::High, Source::Mpc));
    assert!(idx.complete("bullet bonds mat", 10).is_empty());
}

#[test]
fn empty_and_duplicate_logs() {
    let b = bonds();
    assert!(MpcIndex::build(&LogCorpus::default(), &b.grammar).is_empty());
    let log = LogCorpus::new(
        "bonds",
        vec![LoggedQuery::new("ibm bonds", day(), 1), LoggedQuery::new("IBM  bonds", day(), 1)],
    );
    let idx = MpcIndex::build(&log, &b.grammar);
    assert_eq!(idx.len(), 1);
    assert_eq!(idx.entries[0].frequency, 2);
}

#[test]
fn dtype_comes_from_the_atom_under_the_cursor() {
    let b = bonds();
    let log =
        LogCorpus::new("bonds", vec![LoggedQuery::new("chinese non-tech bonds maturing in three years", day(), 1)]);
    let idx = MpcIndex::build(&log, &b.grammar);
    let got = idx.complete("chinese non-te", 10);
    assert_eq!(got.len(), 1);
    assert_eq!(got[0].dtype.as_str(), "SECTOR");
}

#[test]
fn snapshot_round_trip() {
    let b = bonds();
    let idx = MpcIndex::build(&synthesize(&b.grammar, 200, 5), &b.grammar);
    let back: MpcIndex = snapshot::from_bytes(&snapshot::to_bytes(&idx).unwrap()).unwrap();
    assert_eq!(back.entries, idx.entries);
    assert_eq!(back.complete("bonds", 20), idx.complete("bonds", 20));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Trie completion equals a scan over all entries in rank order.
    #[test]
    fn complete_matches_linear_scan(qi in 0usize..300, cut in 0.0f64..1.0, k in 1usize..30) {
        let b = bonds();
        let log = synthesize(&b.grammar, 300, 21);
        let idx = MpcIndex::build(&log, &b.grammar);
        let q = &log.queries[qi].text;
        let ends: Vec<usize> = q.char_indices().map(|(i, c)| i + c.len_utf8()).collect();
        let p = &q[..ends[((ends.len() - 1) as f64 * cut) as usize]];
        let key = text::tokenize(p).normalized();
        let mut all: Vec<_> = idx.entries.iter().filter(|e| e.text.starts_with(&key)).collect();
        all.sort_by(|a, b| b.frequency.cmp(&a.frequency).then_with(|| a.text.cmp(&b.text)));
        let expected: Vec<&str> = all.iter().take(k).map(|e| e.text.as_str()).collect();
        let got = idx.complete(p, k);
        let got: Vec<&str> = got.iter().map(|c| c.completion.as_str()).collect();
        prop_assert_eq!(got, expected);
    }
}
