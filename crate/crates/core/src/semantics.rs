//! Intermediate representation: atoms, formulas, derivations and completions.
//!
//! Formulas are a small first-order fragment (conjunction, disjunction and
//! negation over `field op value` atoms). [`canonicalize`] produces the form
//! used as the semantic dedup key; its `Display` output is the canonical
//! serialization used by golden tests and the HTTP API.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::Range;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Interned symbolic identifier (field, value, unit, type or tag ids).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sym(Arc<str>);

impl Sym {
    pub fn new(s: &str) -> Self {
        Sym(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Sym {
    fn from(s: &str) -> Self {
        Sym::new(s)
    }
}

impl Serialize for Sym {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Sym {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(Sym::new(&s))
    }
}

/// Diversification type of an atom or completion.
pub type DiversificationType = Sym;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Enum,
    Numeric,
    Date,
    String,
    Boolean,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub id: Sym,
    pub value_kind: ValueKind,
    /// Unit ids accepted by a numeric field.
    pub compatible_units: Vec<Sym>,
    /// Value ids accepted by an enum field.
    pub enum_domain: Vec<Sym>,
}

impl FieldDescriptor {
    pub fn accepts_value(&self, value: &Sym) -> bool {
        self.enum_domain.iter().any(|v| v == value)
    }

    pub fn accepts_unit(&self, unit: &Sym) -> bool {
        self.compatible_units.iter().any(|u| u == unit)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TemporalUnit {
    Day,
    Week,
    Month,
    Year,
}

impl TemporalUnit {
    pub fn from_id(id: &str) -> Option<Self> {
        match id {
            "DAY" => Some(TemporalUnit::Day),
            "WEEK" => Some(TemporalUnit::Week),
            "MONTH" => Some(TemporalUnit::Month),
            "YEAR" => Some(TemporalUnit::Year),
            _ => None,
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            TemporalUnit::Day => "DAY",
            TemporalUnit::Week => "WEEK",
            TemporalUnit::Month => "MONTH",
            TemporalUnit::Year => "YEAR",
        }
    }
}

/// Typed atom value. Equality is exact and component-wise; no unit
/// normalization is attempted (`2M USD` and `2000000 USD` are equal only
/// because the numeric parser produces the same magnitude for both).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Value {
    Enum(Sym),
    Numeric {
        magnitude: f64,
        unit: Option<Sym>,
    },
    /// Day, month, year; `-1` marks an unspecified component.
    ExactDate {
        day: i32,
        month: i32,
        year: i32,
    },
    RelativeTime {
        n: i64,
        unit: TemporalUnit,
        anchor: Sym,
    },
    Str(String),
    Bool(bool),
}

impl Value {
    pub fn kind(&self) -> ValueKind {
        match self {
            Value::Enum(_) => ValueKind::Enum,
            Value::Numeric { .. } => ValueKind::Numeric,
            Value::ExactDate { .. } | Value::RelativeTime { .. } => ValueKind::Date,
            Value::Str(_) => ValueKind::String,
            Value::Bool(_) => ValueKind::Boolean,
        }
    }

    /// Checks the component invariants of dates.
    pub fn is_well_formed(&self) -> bool {
        match self {
            Value::ExactDate { day, month, year } => {
                let any = *day != -1 || *month != -1 || *year != -1;
                let d_ok = *day == -1 || (1..=31).contains(day);
                let m_ok = *month == -1 || (1..=12).contains(month);
                let y_ok = *year == -1 || *year >= 0;
                any && d_ok && m_ok && y_ok
            }
            Value::Numeric { magnitude, .. } => magnitude.is_finite(),
            _ => true,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Enum(_) => 0,
            Value::Numeric { .. } => 1,
            Value::ExactDate { .. } => 2,
            Value::RelativeTime { .. } => 3,
            Value::Str(_) => 4,
            Value::Bool(_) => 5,
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        use Value::*;
        match (self, other) {
            (Enum(a), Enum(b)) => a.cmp(b),
            (Numeric { magnitude: a, unit: ua }, Numeric { magnitude: b, unit: ub }) => {
                a.total_cmp(b).then_with(|| ua.cmp(ub))
            }
            (ExactDate { day: d1, month: m1, year: y1 }, ExactDate { day: d2, month: m2, year: y2 }) => {
                (y1, m1, d1).cmp(&(y2, m2, d2))
            }
            (RelativeTime { n: n1, unit: u1, anchor: a1 }, RelativeTime { n: n2, unit: u2, anchor: a2 }) => {
                (n1, u1, a1).cmp(&(n2, u2, a2))
            }
            (Str(a), Str(b)) => a.cmp(b),
            (Bool(a), Bool(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            Value::Enum(s) => s.hash(state),
            Value::Numeric { magnitude, unit } => {
                magnitude.to_bits().hash(state);
                unit.hash(state);
            }
            Value::ExactDate { day, month, year } => (day, month, year).hash(state),
            Value::RelativeTime { n, unit, anchor } => (n, unit, anchor).hash(state),
            Value::Str(s) => s.hash(state),
            Value::Bool(b) => b.hash(state),
        }
    }
}

pub(crate) fn format_magnitude(m: f64) -> String {
    if m.fract() == 0.0 && m.abs() < 1e15 {
        format!("{}", m as i64)
    } else {
        format!("{m}")
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Enum(s) => write!(f, "{s}"),
            Value::Numeric { magnitude, unit: None } => f.write_str(&format_magnitude(*magnitude)),
            Value::Numeric { magnitude, unit: Some(u) } => {
                write!(f, "{}({u})", format_magnitude(*magnitude))
            }
            Value::ExactDate { day, month, year } => write!(f, "ExactDate({day},{month},{year})"),
            Value::RelativeTime { n, unit, anchor } => {
                write!(f, "RELATIVE_TIME({n},{},{anchor})", unit.id())
            }
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Bool(true) => f.write_str("TRUE"),
            Value::Bool(false) => f.write_str("FALSE"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Op {
    Eq,
    Lt,
    Gt,
    Le,
    Ge,
    Ne,
    Contains,
}

impl Op {
    pub fn symbol(self) -> &'static str {
        match self {
            Op::Eq => "=",
            Op::Lt => "<",
            Op::Gt => ">",
            Op::Le => "<=",
            Op::Ge => ">=",
            Op::Ne => "!=",
            Op::Contains => "CONTAINS",
        }
    }

    pub fn parse(s: &str) -> Option<Op> {
        Some(match s {
            "=" | "==" => Op::Eq,
            "<" => Op::Lt,
            ">" => Op::Gt,
            "<=" | "≤" => Op::Le,
            ">=" | "≥" => Op::Ge,
            "!=" | "≠" => Op::Ne,
            "CONTAINS" | "contains" => Op::Contains,
            _ => return None,
        })
    }

    pub fn is_ordering(self) -> bool {
        matches!(self, Op::Lt | Op::Gt | Op::Le | Op::Ge)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub field: Sym,
    pub op: Op,
    pub value: Value,
    pub negated: bool,
}

impl Atom {
    pub fn new(field: &str, op: Op, value: Value) -> Self {
        Atom { field: Sym::new(field), op, value, negated: false }
    }

    pub fn eq(field: &str, value: &str) -> Self {
        Atom::new(field, Op::Eq, Value::Enum(Sym::new(value)))
    }

    pub fn negate(mut self) -> Self {
        self.negated = !self.negated;
        self
    }

    /// Checks the atom against its field descriptor.
    pub fn is_well_formed(&self, field: &FieldDescriptor) -> bool {
        if field.id != self.field || self.value.kind() != field.value_kind {
            return false;
        }
        if self.op.is_ordering() && !matches!(field.value_kind, ValueKind::Numeric | ValueKind::Date) {
            return false;
        }
        if !self.value.is_well_formed() {
            return false;
        }
        match &self.value {
            Value::Enum(v) => field.accepts_value(v),
            Value::Numeric { unit: Some(u), .. } => field.accepts_unit(u),
            _ => true,
        }
    }

    fn sort_key(&self) -> (&Sym, Op, String, bool) {
        (&self.field, self.op, self.value.to_string(), self.negated)
    }
}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = match self.op {
            Op::Contains => format!("{} CONTAINS {}", self.field, self.value),
            op => format!("{}{}{}", self.field, op.symbol(), self.value),
        };
        if self.negated {
            write!(f, "NOT({body})")
        } else {
            f.write_str(&body)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formula {
    Atom(Atom),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
}

impl Formula {
    /// Conjunction of two formulas (not canonicalized).
    pub fn and(self, other: Formula) -> Formula {
        Formula::And(vec![self, other])
    }

    pub fn or(self, other: Formula) -> Formula {
        Formula::Or(vec![self, other])
    }

    /// Conjunction of a list of atoms; `None` for an empty list.
    pub fn conjunction(atoms: impl IntoIterator<Item = Atom>) -> Option<Formula> {
        let mut parts: Vec<Formula> = atoms.into_iter().map(Formula::Atom).collect();
        match parts.len() {
            0 => None,
            1 => parts.pop(),
            _ => Some(Formula::And(parts)),
        }
    }

    /// All atom occurrences, left to right.
    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            Formula::Atom(a) => out.push(a),
            Formula::And(cs) | Formula::Or(cs) => cs.iter().for_each(|c| c.collect_atoms(out)),
            Formula::Not(c) => c.collect_atoms(out),
        }
    }

    /// Structural well-formedness: n-ary nodes have at least two children.
    pub fn is_well_formed(&self) -> bool {
        match self {
            Formula::Atom(a) => a.value.is_well_formed(),
            Formula::And(cs) | Formula::Or(cs) => cs.len() >= 2 && cs.iter().all(Formula::is_well_formed),
            Formula::Not(c) => c.is_well_formed(),
        }
    }

    fn variant_rank(&self) -> u8 {
        match self {
            Formula::Atom(_) => 0,
            Formula::Not(_) => 1,
            Formula::And(_) => 2,
            Formula::Or(_) => 3,
        }
    }

    /// Canonical dedup key.
    pub fn key(&self) -> String {
        canonicalize(self).to_string()
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, name: &str, cs: &[Formula]) -> fmt::Result {
            write!(f, "{name}(")?;
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str(")")
        }
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::And(cs) => list(f, "AND", cs),
            Formula::Or(cs) => list(f, "OR", cs),
            Formula::Not(c) => write!(f, "NOT({c})"),
        }
    }
}

fn formula_order(a: &Formula, b: &Formula) -> Ordering {
    match (a, b) {
        (Formula::Atom(x), Formula::Atom(y)) => x.cmp(y),
        _ => a.variant_rank().cmp(&b.variant_rank()).then_with(|| a.to_string().cmp(&b.to_string())),
    }
}

/// Canonical form: flattened, negation folded into atoms, children sorted by
/// the atom order (field, op, value) and exact duplicates removed.
pub fn canonicalize(f: &Formula) -> Formula {
    match f {
        Formula::Atom(a) => Formula::Atom(a.clone()),
        Formula::Not(inner) => match canonicalize(inner) {
            Formula::Atom(a) => Formula::Atom(a.negate()),
            Formula::Not(g) => *g,
            other => Formula::Not(Box::new(other)),
        },
        Formula::And(cs) => nary(cs, true),
        Formula::Or(cs) => nary(cs, false),
    }
}

fn nary(children: &[Formula], conj: bool) -> Formula {
    let mut flat = Vec::with_capacity(children.len());
    for c in children {
        match (canonicalize(c), conj) {
            (Formula::And(gs), true) | (Formula::Or(gs), false) => flat.extend(gs),
            (g, _) => flat.push(g),
        }
    }
    flat.sort_by(formula_order);
    flat.dedup();
    match flat.len() {
        1 => flat.pop().unwrap(),
        _ if conj => Formula::And(flat),
        _ => Formula::Or(flat),
    }
}

/// Diversification type of an atom: the field on its left-hand side.
pub fn atom_type(a: &Atom) -> DiversificationType {
    a.field.clone()
}

/// An atom occurrence together with the half-open token range it covers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpannedAtom {
    pub atom: Atom,
    pub span: Range<usize>,
    /// Tokens holding the value itself (dates and numbers), when known.
    pub value_span: Option<Range<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Connective {
    And,
    Or,
}

/// Token-span to atom mapping produced by parsing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derivation {
    pub tokens: Vec<String>,
    /// Atom occurrences in source order.
    pub atoms: Vec<SpannedAtom>,
    /// Connective joining `atoms[i]` to everything before it (`connectives[0]`
    /// is always `And` and ignored).
    pub connectives: Vec<Connective>,
}

impl Derivation {
    pub fn empty(tokens: Vec<String>) -> Self {
        Derivation { tokens, atoms: Vec::new(), connectives: Vec::new() }
    }

    /// Left-associative fold of the atoms by their connectives.
    pub fn formula(&self) -> Option<Formula> {
        let mut it = self.atoms.iter().zip(&self.connectives);
        let (first, _) = it.next()?;
        let mut f = Formula::Atom(first.atom.clone());
        for (sa, conn) in it {
            let next = Formula::Atom(sa.atom.clone());
            f = match conn {
                Connective::And => f.and(next),
                Connective::Or => f.or(next),
            };
        }
        Some(f)
    }

    pub fn canonical_formula(&self) -> Option<Formula> {
        self.formula().map(|f| canonicalize(&f))
    }

    /// Number of tokens covered by some atom span.
    pub fn covered_tokens(&self) -> usize {
        self.atoms.iter().map(|a| a.span.len()).sum()
    }

    /// The atom whose span contains token `idx`, falling back to the first
    /// atom starting after it and then to the last atom.
    pub fn atom_at(&self, idx: usize) -> Option<&SpannedAtom> {
        self.atoms
            .iter()
            .find(|a| a.span.contains(&idx))
            .or_else(|| self.atoms.iter().filter(|a| a.span.start >= idx).min_by_key(|a| a.span.start))
            .or_else(|| self.atoms.iter().max_by_key(|a| a.span.end))
    }

    /// Checks span invariants: in bounds and no token claimed twice.
    pub fn is_consistent(&self) -> bool {
        let mut owner = vec![false; self.tokens.len()];
        for a in &self.atoms {
            if a.span.start >= a.span.end || a.span.end > self.tokens.len() {
                return false;
            }
            for i in a.span.clone() {
                if owner[i] {
                    return false;
                }
                owner[i] = true;
            }
        }
        self.connectives.len() == self.atoms.len()
    }
}

/// Type of the atom whose span ends furthest to the right.
pub fn rightmost_atom_type(d: &Derivation) -> Option<DiversificationType> {
    d.atoms.iter().max_by_key(|a| a.span.end).map(|a| atom_type(&a.atom))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Grade {
    Low,
    Medium,
    High,
}

/// Completion algorithm identifier. Declaration order is the coordinator's
/// source priority.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Mpc,
    Atomic,
    Template,
}

impl Source {
    pub fn name(self) -> &'static str {
        match self {
            Source::Mpc => "mpc",
            Source::Atomic => "atomic",
            Source::Template => "template",
        }
    }

    pub fn parse(s: &str) -> Option<Source> {
        match s {
            "mpc" => Some(Source::Mpc),
            "atomic" => Some(Source::Atomic),
            "template" => Some(Source::Template),
            _ => None,
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub completion: String,
    pub interpretation: Formula,
    pub dtype: DiversificationType,
    pub grade: Grade,
    pub score: f64,
    pub source: Source,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(f: &str, v: &str) -> Formula {
        Formula::Atom(Atom::eq(f, v))
    }

    #[test]
    fn conjunction_is_commutative_under_canonicalization() {
        let x = Formula::And(vec![a("SECTOR", "SEC_TECH"), a("COUNTRY_OF_RISK", "CHINA")]);
        let y = Formula::And(vec![a("COUNTRY_OF_RISK", "CHINA"), a("SECTOR", "SEC_TECH")]);
        assert_eq!(canonicalize(&x), canonicalize(&y));
    }

    #[test]
    fn nested_conjunctions_flatten_sorted() {
        let f = Formula::And(vec![
            a("SECTOR", "SEC_TECH"),
            Formula::And(vec![a("MATURITY_TYPE", "BULLET"), a("COUNTRY_OF_RISK", "CHINA")]),
        ]);
        assert_eq!(canonicalize(&f).to_string(), "AND(COUNTRY_OF_RISK=CHINA, MATURITY_TYPE=BULLET, SECTOR=SEC_TECH)");
    }

    #[test]
    fn duplicates_and_double_negation_are_removed() {
        let f = Formula::And(vec![
            a("SECTOR", "SEC_TECH"),
            Formula::Not(Box::new(Formula::Not(Box::new(a("SECTOR", "SEC_TECH"))))),
        ]);
        assert_eq!(canonicalize(&f), a("SECTOR", "SEC_TECH"));
    }

    #[test]
    fn not_over_atom_folds_into_flag() {
        let f = Formula::Not(Box::new(a("SECTOR", "SEC_TECH")));
        let c = canonicalize(&f);
        assert_eq!(c, Formula::Atom(Atom::eq("SECTOR", "SEC_TECH").negate()));
        assert_eq!(c.to_string(), "NOT(SECTOR=SEC_TECH)");
    }

    #[test]
    fn serialization_mirrors_the_derivation_example() {
        let f = Formula::And(vec![
            a("COUNTRY_OF_RISK", "CHINA"),
            Formula::Atom(Atom::eq("SECTOR", "SEC_TECH").negate()),
            Formula::Atom(Atom::new(
                "MATURITY_DATE",
                Op::Eq,
                Value::RelativeTime { n: 3, unit: TemporalUnit::Year, anchor: Sym::new("NOW") },
            )),
        ]);
        assert_eq!(
            f.to_string(),
            "AND(COUNTRY_OF_RISK=CHINA, NOT(SECTOR=SEC_TECH), MATURITY_DATE=RELATIVE_TIME(3,YEAR,NOW))"
        );
    }

    #[test]
    fn atom_types() {
        let d = Atom::new("MATURITY_DATE", Op::Eq, Value::ExactDate { day: -1, month: -1, year: 2020 });
        assert_eq!(atom_type(&d).as_str(), "MATURITY_DATE");
        assert_eq!(atom_type(&Atom::eq("MATURITY_TYPE", "BULLET")).as_str(), "MATURITY_TYPE");
        assert_eq!(atom_type(&Atom::eq("SECTOR", "SEC_TECH").negate()).as_str(), "SECTOR");
    }

    #[test]
    fn rightmost_type_of_empty_derivation_is_absent() {
        assert_eq!(rightmost_atom_type(&Derivation::empty(vec![])), None);
    }

    #[test]
    fn numeric_values_serialize_with_units() {
        let v = Value::Numeric { magnitude: 2.0, unit: Some(Sym::new("PERCENT")) };
        assert_eq!(v.to_string(), "2(PERCENT)");
        let v = Value::Numeric { magnitude: 2.5, unit: None };
        assert_eq!(v.to_string(), "2.5");
        assert_ne!(
            Value::Numeric { magnitude: 2e6, unit: Some(Sym::new("USD")) },
            Value::Numeric { magnitude: 2.0, unit: Some(Sym::new("USD")) }
        );
    }

    #[test]
    fn exact_date_invariants() {
        assert!(Value::ExactDate { day: -1, month: -1, year: 2020 }.is_well_formed());
        assert!(!Value::ExactDate { day: -1, month: -1, year: -1 }.is_well_formed());
        assert!(!Value::ExactDate { day: 1, month: 13, year: 2020 }.is_well_formed());
    }

    #[test]
    fn derivation_formula_is_left_associative() {
        let sa = |f: &str, v: &str, s: Range<usize>| SpannedAtom { atom: Atom::eq(f, v), span: s, value_span: None };
        let d = Derivation {
            tokens: ["french", "german", "or", "italian"].map(String::from).to_vec(),
            atoms: vec![
                sa("COUNTRY_OF_RISK", "FRANCE", 0..1),
                sa("COUNTRY_OF_RISK", "GERMANY", 1..2),
                sa("COUNTRY_OF_RISK", "ITALY", 3..4),
            ],
            connectives: vec![Connective::And, Connective::And, Connective::Or],
        };
        assert!(d.is_consistent());
        assert_eq!(
            d.formula().unwrap().to_string(),
            "OR(AND(COUNTRY_OF_RISK=FRANCE, COUNTRY_OF_RISK=GERMANY), COUNTRY_OF_RISK=ITALY)"
        );
    }
}
