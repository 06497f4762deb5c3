mod common;

use std::sync::Arc;

use proptest::prelude::*;
use semcomplete_core::bundle::DomainBundle;
use semcomplete_core::domain::{Domain, DomainSpec, TypeSpec};
use semcomplete_core::lexicon::Lexicon;
use semcomplete_core::text;

use common::*;

fn surfaces(l: &Lexicon, p: &str) -> Vec<String> {
    l.prefix_match(p, 100).into_iter().map(|e| e.surface.clone()).collect()
}

#[test]
fn entity_prefix_match() {
    let n = news();
    let ents = n.domain.lexicon("entities").unwrap();
    let got = surfaces(ents, "amaz");
    assert!(got.contains(&"amazon".to_string()), "{got:?}");
    assert!(got.contains(&"amazon web services".to_string()), "{got:?}");
    assert!(surfaces(ents, "zzzz-not-present").is_empty());
    let top: Vec<f64> = ents.prefix_match("", 5).iter().map(|e| e.weight).collect();
    let mut best: Vec<f64> = ents.entries().iter().map(|e| e.weight).collect();
    best.sort_by(|a, b| b.total_cmp(a));
    assert_eq!(top, best[..5].to_vec());
}

#[test]
fn type_views() {
    let b = bonds();
    let values = b.domain.lexicon("values").unwrap();
    let exch = values.sub_lexicon_by_type(&b.domain, "EXCHANGE").unwrap();
    assert!(!surfaces(&exch, "nyse").is_empty());
    assert!(surfaces(&exch, "a+").is_empty());
    let rating = values.sub_lexicon_by_type(&b.domain, "RATING").unwrap();
    assert_eq!(surfaces(&rating, "a+"), vec!["a+".to_string()]);
    assert!(values.sub_lexicon_by_type(&b.domain, "NO_SUCH_TYPE").is_err());
}

#[test]
fn type_without_values_gives_an_empty_view() {
    let mut spec = DomainSpec::load(semcomplete_core::bundle::bundled_source("bonds").unwrap()).unwrap();
    spec.types.push(TypeSpec { id: "UNUSED".into(), default_field: "SECTOR".into(), values: Vec::new() });
    let domain: Arc<Domain> = Domain::build(&spec).unwrap();
    let view = domain.lexicon("values").unwrap().sub_lexicon_by_type(&domain, "UNUSED").unwrap();
    assert!(view.is_empty());
    assert!(view.prefix_match("", 10).is_empty());
}

#[test]
fn noun_view_and_partition() {
    let b = bonds();
    let values = b.domain.lexicon("values").unwrap();
    let nouns = values.derive_view("values-noun", |e| e.has_tag("noun"));
    assert!(!nouns.is_empty() && nouns.len() < values.len());
    assert!(nouns.entries().iter().all(|e| e.has_tag("noun")));
    let parts = nouns.partition_by_type();
    let total: usize = parts.values().map(Lexicon::len).sum();
    assert_eq!(total, nouns.entries().iter().filter(|e| e.value_type().is_some()).count());
    for (ty, l) in &parts {
        assert!(l.entries().iter().all(|e| e.value_type() == Some(ty)));
    }
    let none = values.derive_view("nothing", |_| false);
    assert!(none.is_empty() && none.prefix_match("i", 10).is_empty());
}

proptest! {
    /// Trie lookups agree with a linear scan over the entries.
    #[test]
    fn prefix_match_matches_linear_scan(p in "[a-z ]{0,6}", limit in 1usize..20) {
        let b: DomainBundle = bonds();
        let values = b.domain.lexicon("values").unwrap();
        let key = text::tokenize(&p).key();
        let expected: Vec<&str> = values
            .entries()
            .iter()
            .filter(|e| e.key.starts_with(&key))
            .take(limit)
            .map(|e| e.key.as_str())
            .collect();
        let got: Vec<&str> = values.prefix_match(&p, limit).into_iter().map(|e| e.key.as_str()).collect();
        prop_assert_eq!(got, expected);
    }
}
