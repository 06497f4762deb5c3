//! Built-in value parsers used by the `completable` construct.

use chrono::NaiveDate;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ValueParser {
    Numeric,
    Date,
}

/// Surface layout of a parsed date, kept so rewritten dates read like the original.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DateLayout {
    Year,
    MonthYear { abbrev: bool },
    MonthDayYear { abbrev: bool, comma: bool },
    Iso,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Parsed {
    Number(f64),
    Date { day: i32, month: i32, year: i32, layout: DateLayout },
}

const MONTHS: [&str; 12] = [
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
];
const MONTH_ABBREV: [(&str, i32); 13] = [
    ("jan", 1),
    ("feb", 2),
    ("mar", 3),
    ("apr", 4),
    ("may", 5),
    ("jun", 6),
    ("jul", 7),
    ("aug", 8),
    ("sep", 9),
    ("sept", 9),
    ("oct", 10),
    ("nov", 11),
    ("dec", 12),
];

const NUMBER_WORDS: [(&str, f64); 25] = [
    ("zero", 0.0),
    ("one", 1.0),
    ("two", 2.0),
    ("three", 3.0),
    ("four", 4.0),
    ("five", 5.0),
    ("six", 6.0),
    ("seven", 7.0),
    ("eight", 8.0),
    ("nine", 9.0),
    ("ten", 10.0),
    ("eleven", 11.0),
    ("twelve", 12.0),
    ("thirteen", 13.0),
    ("fourteen", 14.0),
    ("fifteen", 15.0),
    ("sixteen", 16.0),
    ("seventeen", 17.0),
    ("eighteen", 18.0),
    ("nineteen", 19.0),
    ("twenty", 20.0),
    ("thirty", 30.0),
    ("forty", 40.0),
    ("fifty", 50.0),
    ("hundred", 100.0),
];

const SUFFIXES: [(&str, f64); 7] =
    [("k", 1e3), ("m", 1e6), ("mm", 1e6), ("mn", 1e6), ("b", 1e9), ("bn", 1e9), ("t", 1e12)];

impl ValueParser {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "numeric" | "numeric-parser" => Ok(ValueParser::Numeric),
            "date" | "date-parser" => Ok(ValueParser::Date),
            other => Err(Error::UnknownParser(other.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ValueParser::Numeric => "numeric",
            ValueParser::Date => "date",
        }
    }

    /// Every way a leading run of `toks` parses, as (tokens consumed, value).
    pub fn parse_prefixes(self, toks: &[&str]) -> Vec<(usize, Parsed)> {
        match self {
            ValueParser::Numeric => {
                toks.first().and_then(|t| parse_number(t)).map(|v| vec![(1, Parsed::Number(v))]).unwrap_or_default()
            }
            ValueParser::Date => parse_date_prefixes(toks),
        }
    }

    /// Parses exactly all of `toks`.
    pub fn parse_all(self, toks: &[&str]) -> Option<Parsed> {
        self.parse_prefixes(toks).into_iter().find(|(k, _)| *k == toks.len()).map(|(_, v)| v)
    }

    /// Whether `toks` (the last one possibly unfinished) can be extended to
    /// something this parser accepts.
    pub fn viable(self, toks: &[&str]) -> bool {
        match self {
            ValueParser::Numeric => toks.len() == 1 && number_viable(toks[0]),
            ValueParser::Date => date_viable(toks),
        }
    }

    /// Whether finished tokens `toks` are a proper leading part of some
    /// accepted value, so more tokens must follow.
    pub fn open(self, toks: &[&str]) -> bool {
        match self {
            ValueParser::Numeric => false,
            ValueParser::Date => date_open(toks),
        }
    }
}

pub fn parse_number(tok: &str) -> Option<f64> {
    if let Some(&(_, v)) = NUMBER_WORDS.iter().find(|(w, _)| *w == tok) {
        return Some(v);
    }
    let (neg, rest) = match tok.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, tok),
    };
    let split = rest.find(|c: char| c.is_ascii_alphabetic()).unwrap_or(rest.len());
    let (body, suffix) = rest.split_at(split);
    let mult = if suffix.is_empty() { 1.0 } else { SUFFIXES.iter().find(|(s, _)| *s == suffix)?.1 };
    if !body_complete(body) {
        return None;
    }
    let v: f64 = body.replace(',', "").parse().ok()?;
    let v = v * mult;
    Some(if neg { -v } else { v })
}

fn body_complete(body: &str) -> bool {
    body_viable(body)
        && !body.ends_with(',')
        && !body.ends_with('.')
        && match body.split('.').next().unwrap().rsplit(',').next() {
            Some(last) if body.contains(',') => last.len() == 3,
            _ => true,
        }
}

fn body_viable(body: &str) -> bool {
    if !body.starts_with(|c: char| c.is_ascii_digit()) {
        return false;
    }
    if !body.chars().all(|c| c.is_ascii_digit() || c == ',' || c == '.') {
        return false;
    }
    let mut parts = body.splitn(2, '.');
    let int = parts.next().unwrap();
    if let Some(frac) = parts.next() {
        if frac.contains('.') || frac.contains(',') {
            return false;
        }
    }
    if int.contains(',') {
        let groups: Vec<&str> = int.split(',').collect();
        if groups[0].is_empty() || groups[0].len() > 3 {
            return false;
        }
        let last = groups.len() - 1;
        for (i, g) in groups.iter().enumerate().skip(1) {
            let ok = if i == last { g.len() <= 3 } else { g.len() == 3 };
            if !ok {
                return false;
            }
        }
        if body.contains('.') && groups[last].len() != 3 {
            return false;
        }
    }
    true
}

pub fn number_viable(tok: &str) -> bool {
    if tok.is_empty() {
        return true;
    }
    if NUMBER_WORDS.iter().any(|(w, _)| w.starts_with(tok)) {
        return true;
    }
    let rest = tok.strip_prefix('-').unwrap_or(tok);
    if rest.is_empty() {
        return true;
    }
    let split = rest.find(|c: char| c.is_ascii_alphabetic()).unwrap_or(rest.len());
    let (body, suffix) = rest.split_at(split);
    if suffix.is_empty() {
        body_viable(body)
    } else {
        body_complete(body) && SUFFIXES.iter().any(|(s, _)| s.starts_with(suffix))
    }
}

fn month_of(tok: &str) -> Option<(i32, bool)> {
    if let Some(i) = MONTHS.iter().position(|m| *m == tok) {
        return Some((i as i32 + 1, false));
    }
    MONTH_ABBREV.iter().find(|(m, _)| *m == tok).map(|&(_, n)| (n, true))
}

fn month_viable(tok: &str) -> bool {
    !tok.is_empty()
        && (MONTHS.iter().any(|m| m.starts_with(tok)) || MONTH_ABBREV.iter().any(|(m, _)| m.starts_with(tok)))
}

fn year_of(tok: &str) -> Option<i32> {
    if tok.len() == 4 && tok.bytes().all(|b| b.is_ascii_digit()) {
        let y: i32 = tok.parse().ok()?;
        (1000..=2999).contains(&y).then_some(y)
    } else {
        None
    }
}

fn year_viable(tok: &str) -> bool {
    !tok.is_empty()
        && tok.len() <= 4
        && tok.bytes().all(|b| b.is_ascii_digit())
        && matches!(tok.as_bytes()[0], b'1' | b'2')
}

fn day_of(tok: &str) -> Option<i32> {
    if (1..=2).contains(&tok.len()) && tok.bytes().all(|b| b.is_ascii_digit()) {
        let d: i32 = tok.parse().ok()?;
        (1..=31).contains(&d).then_some(d)
    } else {
        None
    }
}

fn day_viable(tok: &str) -> bool {
    !tok.is_empty() && tok.len() <= 2 && tok.bytes().all(|b| b.is_ascii_digit()) && tok != "00"
}

pub fn days_in_month(year: i32, month: i32) -> i32 {
    let (ny, nm) = if month == 12 { (year + 1, 1) } else { (year, month + 1) };
    match (NaiveDate::from_ymd_opt(ny, nm as u32, 1), NaiveDate::from_ymd_opt(year, month as u32, 1)) {
        (Some(a), Some(b)) => (a - b).num_days() as i32,
        _ => 31,
    }
}

fn iso_of(tok: &str) -> Option<(i32, i32, i32)> {
    let d = NaiveDate::parse_from_str(tok, "%Y-%m-%d").ok()?;
    use chrono::Datelike;
    (tok.len() == 10).then(|| (d.day() as i32, d.month() as i32, d.year()))
}

fn iso_viable(tok: &str) -> bool {
    const SHAPE: &[u8] = b"dddd-dd-dd";
    tok.len() <= SHAPE.len()
        && tok.bytes().zip(SHAPE).all(|(b, &s)| if s == b'd' { b.is_ascii_digit() } else { b == s })
}

fn parse_date_prefixes(toks: &[&str]) -> Vec<(usize, Parsed)> {
    let mut out = Vec::new();
    let Some(&first) = toks.first() else { return out };
    if let Some((day, month, year)) = iso_of(first) {
        out.push((1, Parsed::Date { day, month, year, layout: DateLayout::Iso }));
    }
    if let Some(year) = year_of(first) {
        out.push((1, Parsed::Date { day: -1, month: -1, year, layout: DateLayout::Year }));
    }
    if let Some((month, abbrev)) = month_of(first) {
        if let Some(year) = toks.get(1).and_then(|t| year_of(t)) {
            out.push((2, Parsed::Date { day: -1, month, year, layout: DateLayout::MonthYear { abbrev } }));
        }
        if let Some(day) = toks.get(1).and_then(|t| day_of(t)) {
            let with_comma = toks.get(2) == Some(&",");
            let (k, ytok) = if with_comma { (4, toks.get(3)) } else { (3, toks.get(2)) };
            if let Some(year) = ytok.and_then(|t| year_of(t)) {
                if day <= days_in_month(year, month) {
                    out.push((
                        k,
                        Parsed::Date {
                            day,
                            month,
                            year,
                            layout: DateLayout::MonthDayYear { abbrev, comma: with_comma },
                        },
                    ));
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy)]
enum Slot {
    Year,
    Month,
    Day,
    Comma,
    Iso,
}

fn slot_full(s: Slot, t: &str) -> bool {
    match s {
        Slot::Year => year_of(t).is_some(),
        Slot::Month => month_of(t).is_some(),
        Slot::Day => day_of(t).is_some(),
        Slot::Comma => t == ",",
        Slot::Iso => iso_of(t).is_some(),
    }
}

fn slot_prefix(s: Slot, t: &str) -> bool {
    match s {
        Slot::Year => year_viable(t),
        Slot::Month => month_viable(t),
        Slot::Day => day_viable(t),
        Slot::Comma => t == ",",
        Slot::Iso => iso_viable(t),
    }
}

use Slot::*;
const PATTERNS: [&[Slot]; 5] = [&[Year], &[Iso], &[Month, Year], &[Month, Day, Comma, Year], &[Month, Day, Year]];

fn date_open(toks: &[&str]) -> bool {
    !toks.is_empty()
        && PATTERNS.iter().any(|p| toks.len() < p.len() && toks.iter().zip(p.iter()).all(|(t, &s)| slot_full(s, t)))
}

fn date_viable(toks: &[&str]) -> bool {
    let Some((last, init)) = toks.split_last() else { return true };
    PATTERNS.iter().any(|p| {
        toks.len() <= p.len()
            && init.iter().zip(p.iter()).all(|(t, &s)| slot_full(s, t))
            && slot_prefix(p[init.len()], last)
    })
}

/// Renders a date in `layout`; `capital` capitalizes month names.
pub fn render_date(day: i32, month: i32, year: i32, layout: DateLayout, capital: bool) -> String {
    let month_name = |abbrev: bool| {
        let full = MONTHS[(month - 1) as usize];
        let s = if abbrev { &full[..3] } else { full };
        if capital {
            let mut c = s.chars();
            let first = c.next().unwrap().to_ascii_uppercase();
            format!("{first}{}", c.as_str())
        } else {
            s.to_string()
        }
    };
    match layout {
        DateLayout::Year => format!("{year}"),
        DateLayout::MonthYear { abbrev } => format!("{} {year}", month_name(abbrev)),
        DateLayout::MonthDayYear { abbrev, comma: true } => {
            format!("{} {day}, {year}", month_name(abbrev))
        }
        DateLayout::MonthDayYear { abbrev, comma: false } => {
            format!("{} {day} {year}", month_name(abbrev))
        }
        DateLayout::Iso => format!("{year:04}-{month:02}-{day:02}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!(parse_number("2"), Some(2.0));
        assert_eq!(parse_number("2m"), Some(2e6));
        assert_eq!(parse_number("1,000,000"), Some(1e6));
        assert_eq!(parse_number("2.5"), Some(2.5));
        assert_eq!(parse_number("three"), Some(3.0));
        assert_eq!(parse_number("-4"), Some(-4.0));
        assert_eq!(parse_number("1,00"), None);
        assert_eq!(parse_number("ibm's"), None);
        assert_eq!(parse_number("2."), None);
    }

    #[test]
    fn number_prefixes() {
        for p in ["2", "2.", "1,0", "thr", "-", "2m", "2b"] {
            assert!(number_viable(p), "{p}");
        }
        for p in ["ibm's", "x", "1,0000", "2q", "2.5.1"] {
            assert!(!number_viable(p), "{p}");
        }
    }

    #[test]
    fn dates() {
        let p = ValueParser::Date;
        assert_eq!(
            p.parse_all(&["may", "30", ",", "2020"]),
            Some(Parsed::Date {
                day: 30,
                month: 5,
                year: 2020,
                layout: DateLayout::MonthDayYear { abbrev: false, comma: true }
            })
        );
        assert!(matches!(p.parse_all(&["2020"]), Some(Parsed::Date { day: -1, month: -1, .. })));
        assert_eq!(p.parse_all(&["february", "30", ",", "2020"]), None);
        assert!(p.viable(&["20"]));
        assert!(p.viable(&["march", "1", ","]));
        assert!(p.viable(&["mar"]));
        assert!(!p.viable(&["market"]));
        assert!(p.open(&["march", "1", ","]));
        assert!(p.open(&["march"]));
        assert!(!p.open(&["marc"]));
        assert!(!p.open(&["2020"]));
    }

    #[test]
    fn render_round_trips_layout() {
        let l = DateLayout::MonthDayYear { abbrev: false, comma: true };
        assert_eq!(render_date(30, 5, 2022, l, true), "May 30, 2022");
        assert_eq!(render_date(1, 9, 2019, DateLayout::MonthYear { abbrev: true }, false), "sep 2019");
    }

    #[test]
    fn month_lengths() {
        assert_eq!(days_in_month(2020, 2), 29);
        assert_eq!(days_in_month(2021, 2), 28);
        assert_eq!(days_in_month(2021, 12), 31);
    }
}
