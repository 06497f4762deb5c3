mod common;

use proptest::prelude::*;
use semcomplete_core::semantics::*;

use common::*;

fn atom_strategy() -> impl Strategy<Value = Formula> {
    let fields = prop::sample::select(vec!["SECTOR", "COUNTRY_OF_RISK", "MATURITY_TYPE", "ISSUING_COMPANY"]);
    let values = prop::sample::select(vec!["A", "B", "C", "D"]);
    (fields, values, any::<bool>()).prop_map(|(f, v, neg)| {
        let a = Atom::eq(f, v);
        Formula::Atom(if neg { a.negate() } else { a })
    })
}

fn formula_strategy() -> impl Strategy<Value = Formula> {
    atom_strategy().prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::And),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::Or),
            inner.prop_map(|f| Formula::Not(Box::new(f))),
        ]
    })
}

proptest! {
    #[test]
    fn canonicalize_is_idempotent(f in formula_strategy()) {
        let c = canonicalize(&f);
        prop_assert_eq!(canonicalize(&c), c.clone());
        prop_assert!(c.is_well_formed());
    }

    #[test]
    fn conjunction_order_does_not_matter(mut parts in prop::collection::vec(formula_strategy(), 2..5), seed in any::<u64>()) {
        let a = canonicalize(&Formula::And(parts.clone()));
        // Deterministic shuffle driven by the seed.
        let n = parts.len();
        for i in (1..n).rev() {
            parts.swap(i, (seed as usize).wrapping_add(i * 7919) % (i + 1));
        }
        prop_assert_eq!(canonicalize(&Formula::And(parts)), a);
    }

    #[test]
    fn keys_agree_with_canonical_equality(f in formula_strategy(), g in formula_strategy()) {
        prop_assert_eq!(f.key() == g.key(), canonicalize(&f) == canonicalize(&g));
    }

    #[test]
    fn canonical_atoms_keep_their_fields(f in formula_strategy()) {
        let mut before: Vec<String> = f.atoms().iter().map(|a| atom_type(a).to_string()).collect();
        let mut after: Vec<String> = canonicalize(&f).atoms().iter().map(|a| atom_type(a).to_string()).collect();
        before.sort();
        before.dedup();
        after.sort();
        after.dedup();
        prop_assert_eq!(before, after);
    }
}

#[test]
fn swapped_conjuncts_canonicalize_alike() {
    let a = eq("SECTOR", "SEC_TECH");
    let b = eq("COUNTRY_OF_RISK", "CHINA");
    assert_eq!(canonicalize(&a.clone().and(b.clone())), canonicalize(&b.and(a)));
}

#[test]
fn nested_conjunction_flattens() {
    let f = Formula::And(vec![
        eq("SECTOR", "SEC_TECH"),
        Formula::And(vec![eq("MATURITY_TYPE", "BULLET"), eq("COUNTRY_OF_RISK", "CHINA")]),
    ]);
    match canonicalize(&f) {
        Formula::And(cs) => assert_eq!(cs.len(), 3),
        other => panic!("expected a flat conjunction, got {other}"),
    }
}

#[test]
fn ibm_and_ibm_bonds_mean_the_same() {
    let b = bonds();
    let f1 = b.grammar.best_parse("ibm").unwrap().formula().unwrap();
    let f2 = b.grammar.best_parse("ibm bonds").unwrap().formula().unwrap();
    assert_eq!(f1, f2);
    assert_eq!(f1, eq("ISSUING_COMPANY", "COMPANY_IBM"));
}

#[test]
fn atom_types_are_fields() {
    let date = Atom::new("MATURITY_DATE", Op::Eq, Value::ExactDate { day: -1, month: -1, year: 2020 });
    assert_eq!(atom_type(&date).as_str(), "MATURITY_DATE");
    assert_eq!(atom_type(&Atom::eq("MATURITY_TYPE", "BULLET")).as_str(), "MATURITY_TYPE");
    assert_eq!(atom_type(&Atom::eq("SECTOR", "SEC_TECH").negate()).as_str(), "SECTOR");
}

#[test]
fn rightmost_types_of_parses() {
    let b = bonds();
    let d = b.grammar.best_parse("maturing in 2020").unwrap().derivation;
    assert_eq!(rightmost_atom_type(&d).unwrap().as_str(), "MATURITY_DATE");
    let d = b.grammar.best_parse("chinese non-tech bonds maturing in three years").unwrap().derivation;
    assert_eq!(rightmost_atom_type(&d).unwrap().as_str(), "MATURITY_DATE");
    assert_eq!(rightmost_atom_type(&Derivation::empty(Vec::new())), None);
}
