//! Tokenization and normalization of queries and lexicon surfaces.
//!
//! Tokens are lowercased. A hyphen directly after a letter separates two
//! tokens but is kept as their separator, so `non-tech` normalizes to itself
//! while tokenizing as `non`, `tech`. A comma is its own token unless it sits
//! between two digits (`1,000`).

use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sep {
    None,
    Space,
    Hyphen,
}

impl Sep {
    pub fn as_str(self) -> &'static str {
        match self {
            Sep::None => "",
            Sep::Space => " ",
            Sep::Hyphen => "-",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    /// Lowercased text.
    pub text: String,
    /// Text as typed.
    pub raw: String,
    /// Separator before this token in normalized form.
    pub sep: Sep,
    /// Byte range in the source string.
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Tokenized {
    pub tokens: Vec<Token>,
    /// Separator after the last token, when the input ends at a token
    /// boundary (trailing whitespace or a dangling hyphen).
    pub trailing: Option<Sep>,
}

impl Tokenized {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// True when the last token may still be growing (no separator typed after it).
    pub fn partial_last(&self) -> bool {
        !self.tokens.is_empty() && self.trailing.is_none()
    }

    pub fn texts(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.text.as_str()).collect()
    }

    /// Lowercased normalized form, including the trailing separator.
    pub fn normalized(&self) -> String {
        let mut s = render(self.tokens.iter().map(|t| (t.sep, t.text.as_str())));
        if let Some(sep) = self.trailing {
            s.push_str(sep.as_str());
        }
        s
    }

    /// Normalized spacing but typed casing, for tokens `range`.
    pub fn display(&self, range: std::ops::Range<usize>) -> String {
        render(self.tokens[range].iter().map(|t| (t.sep, t.raw.as_str())))
    }

    /// Trie key: lowercased tokens joined by single spaces, with a trailing
    /// space when the input ends at a token boundary.
    pub fn key(&self) -> String {
        let mut s = key_of(self.tokens.iter().map(|t| t.text.as_str()));
        if self.trailing.is_some() && !self.tokens.is_empty() {
            s.push(' ');
        }
        s
    }

    pub fn key_range(&self, range: std::ops::Range<usize>) -> String {
        key_of(self.tokens[range].iter().map(|t| t.text.as_str()))
    }

    /// Tokens `from..` as a new tokenized value (first separator dropped).
    pub fn suffix(&self, from: usize) -> Tokenized {
        let mut tokens = self.tokens[from..].to_vec();
        if let Some(t) = tokens.first_mut() {
            t.sep = Sep::None;
        }
        Tokenized { tokens, trailing: self.trailing }
    }
}

/// Joins tokens with their separators; the first separator is dropped.
pub fn render<'a>(toks: impl IntoIterator<Item = (Sep, &'a str)>) -> String {
    let mut s = String::new();
    for (i, (sep, text)) in toks.into_iter().enumerate() {
        if i > 0 {
            s.push_str(sep.as_str());
        }
        s.push_str(text);
    }
    s
}

pub fn key_of<'a>(toks: impl IntoIterator<Item = &'a str>) -> String {
    let mut s = String::new();
    for (i, t) in toks.into_iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(t);
    }
    s
}

pub fn tokenize(input: &str) -> Tokenized {
    let chars: Vec<(usize, char)> = input.char_indices().collect();
    let mut tokens = Vec::new();
    let mut cur_start: Option<usize> = None;
    let mut pending_sep = Sep::None;
    let mut trailing = None;

    let push = |tokens: &mut Vec<Token>, start: usize, end: usize, sep: Sep| {
        let raw = &input[start..end];
        let sep = if tokens.is_empty() { Sep::None } else { sep };
        tokens.push(Token { text: raw.to_lowercase(), raw: raw.to_string(), sep, start, end });
    };

    for (i, &(pos, c)) in chars.iter().enumerate() {
        let prev = if i > 0 { Some(chars[i - 1].1) } else { None };
        let next = chars.get(i + 1).map(|x| x.1);
        if c.is_whitespace() {
            if let Some(s) = cur_start.take() {
                push(&mut tokens, s, pos, pending_sep);
            }
            pending_sep = Sep::Space;
            trailing = Some(Sep::Space);
            continue;
        }
        if c == '-' && cur_start.is_some() && prev.is_some_and(char::is_alphabetic) {
            let s = cur_start.take().unwrap();
            push(&mut tokens, s, pos, pending_sep);
            pending_sep = Sep::Hyphen;
            trailing = Some(Sep::Hyphen);
            continue;
        }
        if c == ','
            && !(prev.is_some_and(|p| p.is_ascii_digit())
                && next.is_some_and(|n| n.is_ascii_digit())
                && cur_start.is_some())
        {
            if let Some(s) = cur_start.take() {
                push(&mut tokens, s, pos, pending_sep);
            }
            push(&mut tokens, pos, pos + 1, Sep::None);
            pending_sep = Sep::Space;
            trailing = None;
            continue;
        }
        if cur_start.is_none() {
            cur_start = Some(pos);
        }
        trailing = None;
    }
    if let Some(s) = cur_start {
        push(&mut tokens, s, input.len(), pending_sep);
        trailing = None;
    }
    if tokens.is_empty() {
        trailing = None;
    }
    Tokenized { tokens, trailing }
}

/// Case-folded, whitespace-collapsed form of `s`.
pub fn normalize(s: &str) -> String {
    tokenize(s).normalized()
}

/// Normalized form without any trailing separator.
pub fn normalize_trimmed(s: &str) -> String {
    let t = tokenize(s);
    render(t.tokens.iter().map(|t| (t.sep, t.text.as_str())))
}

/// Trie key of a full phrase (no trailing separator).
pub fn phrase_key(s: &str) -> String {
    let t = tokenize(s);
    key_of(t.tokens.iter().map(|t| t.text.as_str()))
}

/// Word multiset in sorted order.
pub fn bag_of_words(s: &str) -> Vec<String> {
    let mut w: Vec<String> = tokenize(s).tokens.into_iter().map(|t| t.text).collect();
    w.sort();
    w
}

/// Syntactic extension: every token typed in `prefix` is a prefix of a
/// distinct token of `completion`.
pub fn is_syntactic_extension(prefix: &str, completion: &str) -> bool {
    let p = tokenize(prefix);
    let c = tokenize(completion);
    if p.len() > c.len() {
        return false;
    }
    let adj: Vec<Vec<usize>> = p
        .tokens
        .iter()
        .map(|s| {
            c.tokens.iter().enumerate().filter(|(_, t)| t.text.starts_with(s.text.as_str())).map(|(i, _)| i).collect()
        })
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; c.len()];
    fn augment(u: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for &v in &adj[u] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if owner[v].is_none() || augment(owner[v].unwrap(), adj, owner, seen) {
                owner[v] = Some(u);
                return true;
            }
        }
        false
    }
    (0..p.len()).all(|u| {
        let mut seen = vec![false; c.len()];
        augment(u, &adj, &mut owner, &mut seen)
    })
}

/// Debug rendering of a token list, e.g. `[non|-tech]`.
pub fn debug_tokens(t: &Tokenized) -> String {
    let mut s = String::from("[");
    for (i, tok) in t.tokens.iter().enumerate() {
        if i > 0 {
            s.push('|');
        }
        let _ = write!(s, "{}{}", tok.sep.as_str(), tok.text);
    }
    s.push(']');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyphen_splits_but_normalizes_back() {
        let t = tokenize("Chinese  non-Tech bonds");
        assert_eq!(t.texts(), vec!["chinese", "non", "tech", "bonds"]);
        assert_eq!(t.normalized(), "chinese non-tech bonds");
        assert_eq!(t.key(), "chinese non tech bonds");
        assert!(t.partial_last());
    }

    #[test]
    fn trailing_separators_mark_a_token_boundary() {
        let t = tokenize("chinese non-");
        assert_eq!(t.texts(), vec!["chinese", "non"]);
        assert_eq!(t.trailing, Some(Sep::Hyphen));
        assert_eq!(t.normalized(), "chinese non-");
        let t = tokenize("bullet bonds ");
        assert_eq!(t.normalized(), "bullet bonds ");
        assert!(!t.partial_last());
    }

    #[test]
    fn commas() {
        assert_eq!(tokenize("march 1, 2020").texts(), vec!["march", "1", ",", "2020"]);
        assert_eq!(tokenize("march 1, 2020").normalized(), "march 1, 2020");
        assert_eq!(tokenize("1,000,000 usd").texts(), vec!["1,000,000", "usd"]);
        assert_eq!(tokenize("ipo date,ipo price").normalized(), "ipo date, ipo price");
    }

    #[test]
    fn numbers_and_symbols_stay_whole() {
        assert_eq!(tokenize("yield > -2.5 pct").texts(), vec!["yield", ">", "-2.5", "pct"]);
        assert_eq!(tokenize("2020-05-30").texts(), vec!["2020-05-30"]);
        assert_eq!(tokenize("2...").texts(), vec!["2..."]);
    }

    #[test]
    fn empty_input() {
        let t = tokenize("   ");
        assert!(t.is_empty());
        assert_eq!(t.normalized(), "");
    }

    #[test]
    fn syntactic_extension() {
        assert!(is_syntactic_extension("bullet bonds mat", "bullet bonds maturing in 2020"));
        assert!(is_syntactic_extension("guai", "juan guaido"));
        assert!(is_syntactic_extension("market cap > 2", "market cap > 2... usd"));
        assert!(!is_syntactic_extension("ibm x", "ibm bonds"));
        assert!(!is_syntactic_extension("b b", "bonds"));
    }

    #[test]
    fn display_keeps_typed_case() {
        let t = tokenize("market cap > 2M u");
        assert_eq!(t.display(0..4), "market cap > 2M");
    }
}
