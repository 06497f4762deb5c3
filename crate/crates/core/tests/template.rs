mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use semcomplete_core::completability::{completable, first_dead_char};
use semcomplete_core::grammar::{Generator, Grammar};
use semcomplete_core::semantics::{Grade, Source};
use semcomplete_core::template::TemplateSet;
use semcomplete_core::text::is_syntactic_extension;

use common::*;

fn templates() -> TemplateSet {
    TemplateSet::new(bonds().templates.unwrap())
}

fn texts(t: &TemplateSet, p: &str) -> Vec<String> {
    t.complete(p, 100).into_iter().map(|c| c.completion).collect()
}

#[test]
fn fig3_template_set_loads() {
    let b = bonds();
    let g = b.templates.as_ref().unwrap();
    let names = g.production_names();
    for p in ["enum-present", "numeric-atom-t", "selection-query", "projection-query"] {
        assert!(names.contains(&p), "missing {p} in {names:?}");
    }
}

#[test]
fn case_i_ellipsis() {
    let t = templates();
    let got = t.complete("market cap > 2", 100);
    assert_eq!(got[0].completion, "market cap > 2... usd");
    assert!(got.iter().all(|c| c.grade == Grade::Medium && c.source == Source::Template));
    assert!(texts(&t, "german tech companies with market cap > 2")
        .contains(&"german tech companies with market cap > 2... usd".to_string()));
}

#[test]
fn case_ii_parsed_prefix() {
    assert_eq!(texts(&templates(), "market cap > 2M u"), vec!["market cap > 2M usd".to_string()]);
}

#[test]
fn case_iii_template_failure() {
    let b = bonds();
    assert!(texts(&templates(), "market cap > ibm's market c").is_empty());
    let c = completable(b.templates.as_ref().unwrap(), "market cap > ibm's market c");
    assert!(!c.completable);
    let qa = completable(&b.grammar, "market cap > ibm's market c");
    assert!(!qa.completable);
}

#[test]
fn projection_query_completion() {
    let p = "ipo date, ipo price and fitch rating of equities that trade in n";
    assert!(texts(&templates(), p).contains(&format!("{p}yse")));
}

#[test]
fn completability_examples() {
    let b = bonds();
    assert!(completable(&b.grammar, "market cap > 2").completable);
    assert!(completable(&b.grammar, "").completable);
    let p = "bullet bonds xyz";
    let c = completable(&b.grammar, p);
    let live = |k: usize| b.grammar.probe(&p[..k]);
    let dead = (1..=p.len()).find(|&k| !live(k)).unwrap() - 1;
    assert_eq!(c.dead_at, Some(dead));
    assert!(dead >= "bullet bonds ".len());
}

#[test]
fn template_loading_errors() {
    let b = bonds();
    let no_root = "query = \"bonds\" mark;\n";
    assert!(Grammar::load_str(b.domain.clone(), &b.source, "t.g", no_root).is_err());
    let empty_view = "view none = values where tag=no-such-tag;\nroot query;\nquery = \"bonds\" | @none mark;\n";
    let g = Grammar::load_str(b.domain.clone(), &b.source, "t.g", empty_view).unwrap();
    assert!(g.view("none").unwrap().is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// Prefixes of sentences are completable; template completions extend
    /// the prefix and re-parse to their interpretation.
    #[test]
    fn sentence_prefixes(seed in any::<u64>(), cut in 0.0f64..1.0) {
        let b = bonds();
        let tg = b.templates.clone().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let Some(q) = Generator::new(&tg).sample(&mut rng) else { return Ok(()) };
        let ends: Vec<usize> = q.char_indices().map(|(i, c)| i + c.len_utf8()).collect();
        let p = &q[..ends[((ends.len() - 1) as f64 * cut) as usize]];
        prop_assert!(completable(&tg, p).completable, "{}", p);
        for c in TemplateSet::new(tg.clone()).complete(p, 100) {
            prop_assert!(is_syntactic_extension(p, &c.completion));
            let f = b.grammar.best_parse(&c.completion.replace("...", "")).and_then(|r| r.formula());
            prop_assert_eq!(f.as_ref(), Some(&c.interpretation), "{}", c.completion);
        }
    }

    /// A live prefix has only live prefixes, except a digit followed by a
    /// comma, which only comes back to life when grouped digits follow.
    #[test]
    fn completability_is_prefix_closed(seed in any::<u64>(), junk in "[a-z ,0-9]{0,4}") {
        let b = bonds();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let Some(q) = Generator::new(&b.grammar).sample(&mut rng) else { return Ok(()) };
        let p = format!("{q}{junk}");
        let ends: Vec<usize> = p.char_indices().map(|(i, c)| i + c.len_utf8()).collect();
        let live: Vec<bool> = ends.iter().map(|&e| b.grammar.probe(&p[..e])).collect();
        let Some(last) = live.iter().rposition(|&l| l) else { return Ok(()) };
        for (i, &e) in ends[..last].iter().enumerate() {
            let grouping = p[..e].ends_with(',') && p[..e - 1].ends_with(|c: char| c.is_ascii_digit());
            prop_assert!(live[i] || grouping, "{:?} dead but {:?} live", &p[..e], &p[..ends[last]]);
        }
    }

    /// The reported dead position splits a live prefix from a dead one.
    #[test]
    fn dead_position_is_the_boundary(seed in any::<u64>(), junk in "[qxz]{1,3}") {
        let b = bonds();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let Some(q) = Generator::new(&b.grammar).sample(&mut rng) else { return Ok(()) };
        let p = format!("{q} {junk}");
        let c = completable(&b.grammar, &p);
        if let Some(at) = c.dead_at {
            prop_assert_eq!(at, first_dead_char(&b.grammar, &p));
            let next = at + p[at..].chars().next().unwrap().len_utf8();
            prop_assert!(b.grammar.probe(&p[..at]));
            prop_assert!(!b.grammar.probe(&p[..next]));
        }
    }
}
