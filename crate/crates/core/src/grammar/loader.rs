//! Grammar definition files.
//!
//! ```text
//! # comment
//! include "grammar.g";
//! root query;
//! view entity_value_noun = values where tag=noun;
//! numeric-atom = @numeric_field numeric-pattern compatible-unit @unit mark;
//! numeric-pattern = opt(">" {op=">"} | "greater than" {op=">"}) completable(numeric, "...");
//! firms = "firms" | "companies" | "equities";
//! adjectives = star(@adjective, connective);
//! ```

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::domain::{AssetSource, Domain};
use crate::error::{Error, Result};
use crate::lexicon::{Lexicon, ViewCond};
use crate::semantics::{Op, Sym, ValueKind};
use crate::text;

use super::ast::{Action, Constrained, Node, NodeId, Production};
use super::values::ValueParser;
use super::{Grammar, GrammarOptions};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Punct(&'static str),
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    file: &'a str,
    src: Vec<char>,
    i: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn err(&self, line: usize, col: usize, msg: impl Into<String>) -> Error {
        Error::Grammar { file: self.file.to_string(), line, col, msg: msg.into() }
    }

    fn bump(&mut self) -> Option<char> {
        let c = *self.src.get(self.i)?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn run(mut self) -> Result<Vec<Spanned>> {
        let mut out = Vec::new();
        while let Some(&c) = self.src.get(self.i) {
            let (line, col) = (self.line, self.col);
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else if c == '"' {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None | Some('\n') => return Err(self.err(line, col, "unterminated string")),
                        Some('"') => break,
                        Some('\\') => match self.bump() {
                            Some(e) => s.push(e),
                            None => return Err(self.err(line, col, "unterminated string")),
                        },
                        Some(c) => s.push(c),
                    }
                }
                out.push(Spanned { tok: Tok::Str(s), line, col });
            } else if c.is_alphabetic() || c == '_' {
                let mut s = String::new();
                while let Some(&c) = self.src.get(self.i) {
                    if c.is_alphanumeric() || c == '_' || c == '-' {
                        s.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                out.push(Spanned { tok: Tok::Ident(s), line, col });
            } else {
                let p = match c {
                    ';' => ";",
                    '|' => "|",
                    '(' => "(",
                    ')' => ")",
                    ',' => ",",
                    '{' => "{",
                    '}' => "}",
                    '@' => "@",
                    '=' => "=",
                    '!' if self.src.get(self.i + 1) == Some(&'=') => {
                        self.bump();
                        "!="
                    }
                    other => return Err(self.err(line, col, format!("unexpected character `{other}`"))),
                };
                self.bump();
                out.push(Spanned { tok: Tok::Punct(p), line, col });
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
enum Expr {
    Lit(String, Vec<Action>),
    Lex(String),
    Seq(Vec<(Expr, Pos)>),
    Alt(Vec<Expr>),
    Kleene(Box<Expr>, Box<Expr>, usize),
    Opt(Box<Expr>),
    Ref(String),
    CompatValue,
    CompatUnit,
    Completable(ValueParser, String),
    Mark,
    Eps,
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    col: usize,
}

struct Decl {
    name: String,
    body: Expr,
    pos: Pos,
    file: String,
}

struct ViewDecl {
    name: String,
    source: String,
    conds: Vec<ViewCond>,
    pos: Pos,
    file: String,
}

#[derive(Default)]
struct Collected {
    root: Option<(String, Pos, String)>,
    decls: Vec<Decl>,
    views: Vec<ViewDecl>,
}

struct Parser<'a> {
    file: &'a str,
    toks: Vec<Spanned>,
    i: usize,
}

impl<'a> Parser<'a> {
    fn pos(&self) -> Pos {
        match self.toks.get(self.i).or(self.toks.last()) {
            Some(t) => Pos { line: t.line, col: t.col },
            None => Pos { line: 1, col: 1 },
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let p = self.pos();
        Error::Grammar { file: self.file.to_string(), line: p.line, col: p.col, msg: msg.into() }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.tok)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.i).map(|t| t.tok.clone());
        self.i += 1;
        t
    }

    fn punct(&mut self, p: &str) -> Result<()> {
        match self.peek() {
            Some(Tok::Punct(q)) if *q == p => {
                self.i += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected `{p}`"))),
        }
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(Tok::Punct(q)) if *q == p)
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.i += 1;
                Ok(s)
            }
            _ => Err(self.err("expected identifier")),
        }
    }

    fn string(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Str(s)) => {
                let s = s.clone();
                self.i += 1;
                Ok(s)
            }
            _ => Err(self.err("expected string literal")),
        }
    }

    fn file(&mut self, out: &mut Collected, includes: &mut Vec<(String, Pos)>) -> Result<()> {
        while self.peek().is_some() {
            let pos = self.pos();
            let head = self.ident()?;
            match head.as_str() {
                "include" => {
                    let f = self.string()?;
                    self.punct(";")?;
                    includes.push((f, pos));
                }
                "root" => {
                    let name = self.ident()?;
                    self.punct(";")?;
                    if out.root.is_some() {
                        return Err(Error::Grammar {
                            file: self.file.into(),
                            line: pos.line,
                            col: pos.col,
                            msg: "duplicate root declaration".into(),
                        });
                    }
                    out.root = Some((name, pos, self.file.to_string()));
                }
                "view" => {
                    let name = self.ident()?;
                    self.punct("=")?;
                    let source = self.ident()?;
                    let mut conds = Vec::new();
                    if matches!(self.peek(), Some(Tok::Ident(w)) if w == "where") {
                        self.i += 1;
                        loop {
                            conds.push(self.cond()?);
                            if self.is_punct(",") {
                                self.i += 1;
                            } else {
                                break;
                            }
                        }
                    }
                    self.punct(";")?;
                    out.views.push(ViewDecl { name, source, conds, pos, file: self.file.into() });
                }
                _ => {
                    self.punct("=")?;
                    let body = self.alt()?;
                    self.punct(";")?;
                    out.decls.push(Decl { name: head, body, pos, file: self.file.into() });
                }
            }
        }
        Ok(())
    }

    fn cond(&mut self) -> Result<ViewCond> {
        let key = self.ident()?;
        let want = if self.is_punct("!=") {
            self.i += 1;
            false
        } else {
            self.punct("=")?;
            true
        };
        let val = match self.next() {
            Some(Tok::Ident(s)) | Some(Tok::Str(s)) => s,
            _ => {
                self.i -= 1;
                return Err(self.err("expected value"));
            }
        };
        Ok(match key.as_str() {
            "tag" => ViewCond::Tag(val, want),
            "type" => ViewCond::Type(val, want),
            "kind" => match val.as_str() {
                "field" | "value" | "unit" | "keyword" => ViewCond::Kind(val, want),
                _ => return Err(self.err(format!("unknown target kind `{val}`"))),
            },
            "field_kind" => {
                let k = match val.as_str() {
                    "enum" => ValueKind::Enum,
                    "numeric" => ValueKind::Numeric,
                    "date" => ValueKind::Date,
                    "string" => ValueKind::String,
                    "boolean" => ValueKind::Boolean,
                    _ => return Err(self.err(format!("unknown value kind `{val}`"))),
                };
                ViewCond::FieldKind(k, want)
            }
            _ => return Err(self.err(format!("unknown view condition `{key}`"))),
        })
    }

    fn alt(&mut self) -> Result<Expr> {
        let mut alts = vec![self.seq()?];
        while self.is_punct("|") {
            self.i += 1;
            alts.push(self.seq()?);
        }
        Ok(if alts.len() == 1 { alts.pop().unwrap() } else { Expr::Alt(alts) })
    }

    fn seq(&mut self) -> Result<Expr> {
        let mut items = Vec::new();
        loop {
            match self.peek() {
                None => break,
                Some(Tok::Punct(p)) if matches!(*p, "|" | ")" | "," | ";") => break,
                _ => {
                    let pos = self.pos();
                    items.push((self.item()?, pos));
                }
            }
        }
        match items.len() {
            0 => Err(self.err("empty sequence")),
            1 if !matches!(items[0].0, Expr::Mark) => Ok(items.pop().unwrap().0),
            _ => Ok(Expr::Seq(items)),
        }
    }

    fn call_open(&mut self) -> Result<()> {
        self.punct("(")
    }

    fn item(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Tok::Str(s)) => {
                if text::tokenize(&s).is_empty() {
                    self.i -= 1;
                    return Err(self.err("empty literal"));
                }
                let mut actions = Vec::new();
                if self.is_punct("{") {
                    self.i += 1;
                    loop {
                        actions.push(self.action()?);
                        if self.is_punct(",") {
                            self.i += 1;
                        } else {
                            break;
                        }
                    }
                    self.punct("}")?;
                }
                Ok(Expr::Lit(s, actions))
            }
            Some(Tok::Punct("@")) => Ok(Expr::Lex(self.ident()?)),
            Some(Tok::Punct("(")) => {
                let e = self.alt()?;
                self.punct(")")?;
                Ok(e)
            }
            Some(Tok::Ident(id)) => match id.as_str() {
                "opt" if self.is_punct("(") => {
                    self.call_open()?;
                    let e = self.alt()?;
                    self.punct(")")?;
                    Ok(Expr::Opt(Box::new(e)))
                }
                "star" | "plus" if self.is_punct("(") => {
                    self.call_open()?;
                    let item = self.alt()?;
                    self.punct(",")?;
                    let sep = self.alt()?;
                    self.punct(")")?;
                    let min = if id == "plus" { 1 } else { 0 };
                    Ok(Expr::Kleene(Box::new(item), Box::new(sep), min))
                }
                "completable" if self.is_punct("(") => {
                    self.call_open()?;
                    let pname = self.ident()?;
                    let parser = ValueParser::from_name(&pname).map_err(|e| {
                        self.i -= 1;
                        self.err(e.to_string())
                    })?;
                    self.punct(",")?;
                    let sub = self.string()?;
                    self.punct(")")?;
                    Ok(Expr::Completable(parser, sub))
                }
                "compatible-value" | "compatible-unit" => {
                    if self.is_punct("(") {
                        self.i += 1;
                        self.punct(")")?;
                    }
                    Ok(if id == "compatible-value" { Expr::CompatValue } else { Expr::CompatUnit })
                }
                "mark" => Ok(Expr::Mark),
                "eps" => Ok(Expr::Eps),
                _ => Ok(Expr::Ref(id)),
            },
            _ => {
                self.i -= 1;
                Err(self.err("expected grammar expression"))
            }
        }
    }

    fn action(&mut self) -> Result<Action> {
        let name = self.ident()?;
        Ok(match name.as_str() {
            "not" => Action::Not,
            "or" => Action::Or,
            "and" => Action::And,
            "same-field" => Action::SameField,
            "past" => Action::Past,
            "op" => {
                self.punct("=")?;
                let s = self.string()?;
                Action::Op(Op::parse(&s).ok_or_else(|| self.err(format!("unknown operator `{s}`")))?)
            }
            "field" | "value" | "unit" => {
                self.punct("=")?;
                let v = Sym::new(&self.ident()?);
                match name.as_str() {
                    "field" => Action::Field(v),
                    "value" => Action::Value(v),
                    _ => Action::Unit(v),
                }
            }
            _ => return Err(self.err(format!("unknown action `{name}`"))),
        })
    }
}

fn collect(
    source: &AssetSource,
    file: &str,
    text: &str,
    out: &mut Collected,
    seen: &mut HashSet<String>,
    top: bool,
) -> Result<()> {
    seen.insert(file.to_string());
    let toks = Lexer { file, src: text.chars().collect(), i: 0, line: 1, col: 1 }.run()?;
    let mut p = Parser { file, toks, i: 0 };
    let mut local = Collected::default();
    let mut includes = Vec::new();
    p.file(&mut local, &mut includes)?;
    for (inc, pos) in includes {
        if seen.contains(&inc) {
            continue;
        }
        let body = source.read(&inc).map_err(|e| Error::Grammar {
            file: file.to_string(),
            line: pos.line,
            col: pos.col,
            msg: format!("include `{inc}`: {e}"),
        })?;
        collect(source, &inc, &body, out, seen, false)?;
    }
    if top {
        out.root = local.root;
    }
    out.decls.extend(local.decls);
    out.views.extend(local.views);
    Ok(())
}

struct Builder<'d> {
    domain: &'d Domain,
    nodes: Vec<Node>,
    prod_index: HashMap<String, usize>,
    lexicons: HashMap<String, Lexicon>,
    file: String,
}

impl Builder<'_> {
    fn err(&self, pos: Pos, msg: impl Into<String>) -> Error {
        Error::Grammar { file: self.file.clone(), line: pos.line, col: pos.col, msg: msg.into() }
    }

    fn push(&mut self, n: Node) -> NodeId {
        self.nodes.push(n);
        (self.nodes.len() - 1) as NodeId
    }

    fn lexicon(&self, name: &str, pos: Pos) -> Result<Lexicon> {
        self.lexicons.get(name).cloned().ok_or_else(|| self.err(pos, format!("unknown lexicon `{name}`")))
    }

    fn check_actions(&self, actions: &[Action], pos: Pos) -> Result<()> {
        for a in actions {
            let ok = match a {
                Action::Field(f) => self.domain.field(f).is_some(),
                Action::Value(v) => self.domain.value_type(v).is_some(),
                Action::Unit(u) => self.domain.units.contains_key(u),
                _ => true,
            };
            if !ok {
                return Err(self.err(pos, format!("action refers to unknown identifier: {a:?}")));
            }
        }
        Ok(())
    }

    fn build(&mut self, e: &Expr, pos: Pos) -> Result<NodeId> {
        Ok(match e {
            Expr::Lit(s, actions) => {
                self.check_actions(actions, pos)?;
                let t = text::tokenize(s);
                let seps = t.tokens.iter().map(|t| t.sep).collect();
                let toks = t.tokens.into_iter().map(|t| t.text).collect();
                self.push(Node::Lit { toks, seps, actions: actions.clone() })
            }
            Expr::Lex(name) => {
                let lex = self.lexicon(name, pos)?;
                self.push(Node::Lex { lex, constrained: None })
            }
            Expr::Seq(items) => {
                let atomic = matches!(items.last(), Some((Expr::Mark, _)));
                for (i, (it, p)) in items.iter().enumerate() {
                    match it {
                        Expr::Mark if i + 1 != items.len() => return Err(self.err(*p, "`mark` must end its sequence")),
                        Expr::CompatValue | Expr::CompatUnit => {
                            let before = items[..i].iter().any(|(x, _)| matches!(x, Expr::Lex(_)));
                            let after = items[i + 1..].iter().any(|(x, _)| matches!(x, Expr::Lex(_)));
                            if !before || !after {
                                return Err(self.err(
                                    *p,
                                    "compatibility constraint needs a lexicon lookup before and after it in the same sequence",
                                ));
                            }
                        }
                        _ => {}
                    }
                }
                let mut ids = Vec::with_capacity(items.len());
                let mut pending: Option<bool> = None;
                for (it, p) in items {
                    let id = match it {
                        Expr::Mark => self.push(Node::Mark),
                        _ => self.build(it, *p)?,
                    };
                    match it {
                        Expr::CompatValue => pending = Some(true),
                        Expr::CompatUnit => pending = Some(false),
                        Expr::Lex(_) if pending.is_some() => {
                            let values = pending.take().unwrap();
                            self.constrain(id, values);
                        }
                        _ => {}
                    }
                    ids.push(id);
                }
                self.push(Node::Seq { items: ids, atomic })
            }
            Expr::Alt(alts) => {
                let ids = alts.iter().map(|a| self.build(a, pos)).collect::<Result<Vec<_>>>()?;
                self.push(Node::Alt(ids))
            }
            Expr::Kleene(item, sep, min) => {
                let item = self.build(item, pos)?;
                let sep = self.build(sep, pos)?;
                self.push(Node::Kleene { item, sep, min: *min })
            }
            Expr::Opt(inner) => {
                let inner = self.build(inner, pos)?;
                self.push(Node::Opt(inner))
            }
            Expr::Ref(name) => {
                let idx =
                    *self.prod_index.get(name).ok_or_else(|| self.err(pos, format!("unknown production `{name}`")))?;
                self.push(Node::Ref(idx))
            }
            Expr::CompatValue => self.push(Node::CompatValue),
            Expr::CompatUnit => self.push(Node::CompatUnit),
            Expr::Completable(parser, sub) => self.push(Node::Completable { parser: *parser, sub: sub.clone() }),
            Expr::Mark => return Err(self.err(pos, "`mark` must end an atomic sequence")),
            Expr::Eps => self.push(Node::Eps),
        })
    }

    fn constrain(&mut self, id: NodeId, values: bool) {
        let Node::Lex { lex, constrained } = &mut self.nodes[id as usize] else { return };
        *constrained = Some(if values {
            Constrained::Values(lex.partition_by_type())
        } else {
            let mut by_field = HashMap::new();
            for f in self.domain.fields.values() {
                if f.value_kind == ValueKind::Numeric {
                    let units = f.compatible_units.clone();
                    let view = lex.derive_view(
                        &format!("{}[{}]", lex.name(), f.id),
                        |e| matches!(&e.target, crate::domain::Target::Unit(u) if units.contains(u)),
                    );
                    by_field.insert(f.id.clone(), view);
                }
            }
            Constrained::Units(by_field)
        });
    }
}

pub(crate) fn load(domain: Arc<Domain>, source: &AssetSource, file: &str, opts: GrammarOptions) -> Result<Grammar> {
    let text = source.read(file)?;
    load_str(domain, source, file, &text, opts)
}

pub(crate) fn load_str(
    domain: Arc<Domain>,
    source: &AssetSource,
    file: &str,
    text: &str,
    opts: GrammarOptions,
) -> Result<Grammar> {
    let mut col = Collected::default();
    collect(source, file, text, &mut col, &mut HashSet::new(), true)?;
    let (root_name, root_pos, root_file) = col.root.clone().ok_or_else(|| Error::Grammar {
        file: file.to_string(),
        line: 1,
        col: 1,
        msg: "missing `root` declaration".into(),
    })?;

    let mut lexicons: HashMap<String, Lexicon> = domain.lexicons.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    for v in &col.views {
        let src = lexicons.get(&v.source).cloned().ok_or_else(|| Error::Grammar {
            file: v.file.clone(),
            line: v.pos.line,
            col: v.pos.col,
            msg: format!("unknown lexicon `{}`", v.source),
        })?;
        let d = domain.clone();
        let conds = v.conds.clone();
        let view = src.derive_view(&v.name, move |e| conds.iter().all(|c| c.holds(e, &d)));
        if view.is_empty() {
            log::warn!("{}: view `{}` matches no entries", v.file, v.name);
        }
        lexicons.insert(v.name.clone(), view);
    }

    let mut prod_index = HashMap::new();
    for (i, d) in col.decls.iter().enumerate() {
        if prod_index.insert(d.name.clone(), i).is_some() {
            return Err(Error::Grammar {
                file: d.file.clone(),
                line: d.pos.line,
                col: d.pos.col,
                msg: format!("duplicate production `{}`", d.name),
            });
        }
    }
    let mut b = Builder { domain: &domain, nodes: Vec::new(), prod_index, lexicons, file: String::new() };
    let mut prods = Vec::with_capacity(col.decls.len());
    for d in &col.decls {
        b.file = d.file.clone();
        let body = b.build(&d.body, d.pos)?;
        prods.push(Production { name: d.name.clone(), body });
    }
    let root_idx = *b.prod_index.get(&root_name).ok_or_else(|| Error::Grammar {
        file: root_file,
        line: root_pos.line,
        col: root_pos.col,
        msg: format!("root production `{root_name}` is not defined"),
    })?;
    let root = prods[root_idx].body;
    let views = b.lexicons;
    let nodes = b.nodes;
    Ok(Grammar { nodes, prods, root, root_name, domain, opts, views })
}
