//! Reader and writer for the ontology file format, a subset of Turtle.
//!
//! Accepted: `@prefix` directives, statements terminated by `.`, predicate
//! lists (`;`), object lists (`,`), `a` for `rdf:type`, full IRIs in angle
//! brackets, prefixed names, double-quoted strings with backslash escapes
//! and an optional `^^datatype`, and `#` line comments. Blank nodes,
//! collections, numeric shorthand and `@base` are rejected.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::term::{escape_literal, vocab, Interner, Term, Triple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TurtleError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown prefix {label:?} at line {line}, column {column}")]
    UnknownPrefix {
        label: String,
        line: usize,
        column: usize,
    },
}

impl TurtleError {
    pub fn line(&self) -> usize {
        match self {
            TurtleError::Syntax { line, .. } | TurtleError::UnknownPrefix { line, .. } => *line,
        }
    }
}

/// Prefix label (possibly empty) to namespace IRI.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrefixMap {
    entries: BTreeMap<String, String>,
}

impl PrefixMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds or replaces a prefix. Returns false (and changes nothing) when
    /// the namespace is empty or contains whitespace, or the label is not a
    /// valid prefix label.
    pub fn insert(&mut self, label: impl Into<String>, namespace: impl Into<String>) -> bool {
        let (label, namespace) = (label.into(), namespace.into());
        if namespace.is_empty() || namespace.chars().any(char::is_whitespace) || !is_prefix_label(&label) {
            return false;
        }
        self.entries.insert(label, namespace);
        true
    }

    pub fn get(&self, label: &str) -> Option<&str> {
        self.entries.get(label).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn expand(&self, label: &str, local: &str) -> Option<String> {
        self.get(label).map(|ns| format!("{ns}{local}"))
    }

    /// Shortest prefixed form of `iri` using the longest matching
    /// namespace, if the remainder is a valid local name.
    pub fn compact(&self, iri: &str) -> Option<String> {
        self.entries
            .iter()
            .filter(|(_, ns)| iri.starts_with(ns.as_str()) && is_local_name(&iri[ns.len()..]))
            .max_by(|a, b| a.1.len().cmp(&b.1.len()).then_with(|| b.0.cmp(a.0)))
            .map(|(label, ns)| format!("{label}:{}", &iri[ns.len()..]))
    }
}

impl<L: Into<String>, N: Into<String>> FromIterator<(L, N)> for PrefixMap {
    fn from_iter<T: IntoIterator<Item = (L, N)>>(iter: T) -> Self {
        let mut map = PrefixMap::new();
        for (l, n) in iter {
            map.insert(l, n);
        }
        map
    }
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-' || c == '.'
}

// A dot inside a name must be followed by a non-dot name character.
fn dots_ok(name: &str) -> bool {
    !name.ends_with('.') && !name.contains("..")
}

pub(crate) fn is_prefix_label(label: &str) -> bool {
    let mut chars = label.chars();
    match chars.next() {
        None => true,
        Some(first) => first.is_alphabetic() && chars.all(is_name_char) && dots_ok(label),
    }
}

pub(crate) fn is_local_name(local: &str) -> bool {
    let mut chars = local.chars();
    match chars.next() {
        None => true,
        Some(first) => {
            (first.is_alphanumeric() || first == '_') && chars.all(is_name_char) && dots_ok(local)
        }
    }
}

/// A parsed document: its prefixes and its statements in document order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Document {
    pub prefixes: PrefixMap,
    pub triples: Vec<Triple>,
}

impl Document {
    pub fn new(prefixes: PrefixMap, triples: Vec<Triple>) -> Self {
        Document { prefixes, triples }
    }

    pub fn triple_set(&self) -> BTreeSet<Triple> {
        self.triples.iter().cloned().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    PrefixDirective,
    Iri(String),
    PName(String, String),
    A,
    Str(String),
    Caret2,
    Dot,
    Semicolon,
    Comma,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

/// Character cursor tracking 1-based line and column.
pub(crate) struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pub line: usize,
    pub column: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(text: &'a str) -> Self {
        Cursor {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    pub fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    pub fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    /// Skips whitespace and `#` comments.
    pub fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    /// Consumes name characters; a trailing `.` is left for the caller
    /// only when the next character cannot continue the name.
    pub fn take_name(&mut self) -> String {
        let mut name = String::new();
        while let Some(c) = self.peek() {
            if c == '.' {
                // Lookahead: a dot continues the name only when followed by a name char.
                let mut ahead = self.chars.clone();
                ahead.next();
                match ahead.next() {
                    Some(n) if n.is_alphanumeric() || n == '_' || n == '-' => {}
                    _ => break,
                }
            } else if !is_name_char(c) {
                break;
            }
            name.push(c);
            self.bump();
        }
        name
    }
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> TurtleError {
    TurtleError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// Reads `<...>` after the opening bracket has been peeked.
pub(crate) fn lex_iri(cur: &mut Cursor<'_>) -> Result<String, (usize, usize, String)> {
    let (line, column) = (cur.line, cur.column);
    cur.bump();
    let mut iri = String::new();
    loop {
        match cur.bump() {
            Some('>') => break,
            Some(c) if c.is_whitespace() => {
                return Err((line, column, "whitespace inside IRI".into()));
            }
            Some(c) => iri.push(c),
            None => return Err((line, column, "unterminated IRI".into())),
        }
    }
    if iri.is_empty() {
        return Err((line, column, "empty IRI".into()));
    }
    Ok(iri)
}

/// Reads a double-quoted string after the opening quote has been peeked.
pub(crate) fn lex_string(cur: &mut Cursor<'_>) -> Result<String, (usize, usize, String)> {
    let (line, column) = (cur.line, cur.column);
    cur.bump();
    let mut value = String::new();
    loop {
        match cur.bump() {
            Some('"') => break,
            Some('\\') => match cur.bump() {
                Some('"') => value.push('"'),
                Some('\\') => value.push('\\'),
                Some('n') => value.push('\n'),
                Some('r') => value.push('\r'),
                Some('t') => value.push('\t'),
                Some(c) => {
                    return Err((cur.line, cur.column - 1, format!("unsupported escape \\{c}")));
                }
                None => return Err((line, column, "unterminated string".into())),
            },
            Some('\n') | None => return Err((line, column, "unterminated string".into())),
            Some(c) => value.push(c),
        }
    }
    Ok(value)
}

fn lex(text: &str) -> Result<Vec<Spanned>, TurtleError> {
    let mut cur = Cursor::new(text);
    let mut out = Vec::new();
    loop {
        cur.skip_trivia();
        let (line, column) = (cur.line, cur.column);
        let Some(c) = cur.peek() else { break };
        let tok = match c {
            '<' => Tok::Iri(lex_iri(&mut cur).map_err(|(l, c, m)| syntax(l, c, m))?),
            '"' => Tok::Str(lex_string(&mut cur).map_err(|(l, c, m)| syntax(l, c, m))?),
            '.' => {
                cur.bump();
                Tok::Dot
            }
            ';' => {
                cur.bump();
                Tok::Semicolon
            }
            ',' => {
                cur.bump();
                Tok::Comma
            }
            '^' => {
                cur.bump();
                if cur.bump() != Some('^') {
                    return Err(syntax(line, column, "expected '^^'"));
                }
                Tok::Caret2
            }
            '@' => {
                cur.bump();
                let word = cur.take_name();
                if word != "prefix" {
                    return Err(syntax(line, column, format!("unsupported directive @{word}")));
                }
                Tok::PrefixDirective
            }
            '_' if text_at_blank(&cur) => {
                return Err(syntax(line, column, "blank nodes are not supported"));
            }
            c if c == ':' || c.is_alphabetic() => {
                let label = if c == ':' { String::new() } else { cur.take_name() };
                if cur.peek() == Some(':') {
                    cur.bump();
                    let local = if cur.peek().is_some_and(|c| c.is_alphanumeric() || c == '_') {
                        cur.take_name()
                    } else {
                        String::new()
                    };
                    if !is_prefix_label(&label) {
                        return Err(syntax(line, column, format!("invalid prefix label {label:?}")));
                    }
                    Tok::PName(label, local)
                } else if label == "a" {
                    Tok::A
                } else {
                    return Err(syntax(line, column, format!("unexpected word {label:?}")));
                }
            }
            c => return Err(syntax(line, column, format!("unexpected character {c:?}"))),
        };
        out.push(Spanned { tok, line, column });
    }
    Ok(out)
}

fn text_at_blank(cur: &Cursor<'_>) -> bool {
    let mut ahead = cur.chars.clone();
    ahead.next() == Some('_') && ahead.next() == Some(':')
}

struct Parser<'i> {
    tokens: Vec<Spanned>,
    pos: usize,
    prefixes: PrefixMap,
    interner: &'i mut Interner,
    end: (usize, usize),
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Spanned> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self, expected: &str) -> Result<Spanned, TurtleError> {
        match self.tokens.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => Err(syntax(self.end.0, self.end.1, format!("unexpected end of input, expected {expected}"))),
        }
    }

    fn expect(&mut self, want: Tok, expected: &str) -> Result<(), TurtleError> {
        let t = self.next(expected)?;
        if t.tok != want {
            return Err(syntax(t.line, t.column, format!("expected {expected}")));
        }
        Ok(())
    }

    fn resolve(&mut self, t: &Spanned) -> Result<Term, TurtleError> {
        let iri = match &t.tok {
            Tok::Iri(iri) => iri.clone(),
            Tok::PName(label, local) => self.prefixes.expand(label, local).ok_or_else(|| {
                TurtleError::UnknownPrefix {
                    label: label.clone(),
                    line: t.line,
                    column: t.column,
                }
            })?,
            Tok::A => vocab::RDF_TYPE.to_owned(),
            _ => return Err(syntax(t.line, t.column, "expected an IRI")),
        };
        self.interner
            .iri(&iri)
            .map_err(|e| syntax(t.line, t.column, e.to_string()))
    }

    fn prefix_directive(&mut self) -> Result<(), TurtleError> {
        let label = self.next("prefix label")?;
        let Tok::PName(name, local) = &label.tok else {
            return Err(syntax(label.line, label.column, "expected prefix label"));
        };
        if !local.is_empty() {
            return Err(syntax(label.line, label.column, "expected prefix label"));
        }
        let ns = self.next("namespace IRI")?;
        let Tok::Iri(iri) = &ns.tok else {
            return Err(syntax(ns.line, ns.column, "expected namespace IRI"));
        };
        self.prefixes.insert(name.clone(), iri.clone());
        self.expect(Tok::Dot, "'.' after prefix directive")
    }

    fn object(&mut self) -> Result<Term, TurtleError> {
        let t = self.next("object")?;
        match &t.tok {
            Tok::Str(value) => {
                let datatype = if self.peek().is_some_and(|n| n.tok == Tok::Caret2) {
                    self.pos += 1;
                    let dt = self.next("datatype IRI")?;
                    if matches!(dt.tok, Tok::A) {
                        return Err(syntax(dt.line, dt.column, "expected datatype IRI"));
                    }
                    Some(self.resolve(&dt)?)
                } else {
                    None
                };
                self.interner
                    .literal(value, datatype.as_ref().map(Term::text))
                    .map_err(|e| syntax(t.line, t.column, e.to_string()))
            }
            Tok::A => Err(syntax(t.line, t.column, "'a' is only allowed as a predicate")),
            _ => self.resolve(&t),
        }
    }

    fn statement(&mut self, first: Spanned, out: &mut Vec<Triple>) -> Result<(), TurtleError> {
        if matches!(first.tok, Tok::A) {
            return Err(syntax(first.line, first.column, "'a' is only allowed as a predicate"));
        }
        let subject = self.resolve(&first)?;
        loop {
            let p = self.next("predicate")?;
            let predicate = self.resolve(&p)?;
            loop {
                let object = self.object()?;
                out.push(
                    Triple::new(subject.clone(), predicate.clone(), object)
                        .expect("subject and predicate are IRIs"),
                );
                if self.peek().is_some_and(|t| t.tok == Tok::Comma) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            let sep = self.next("'.' or ';'")?;
            match sep.tok {
                Tok::Dot => return Ok(()),
                Tok::Semicolon => {
                    // Trailing `;` before the terminating dot.
                    if self.peek().is_some_and(|t| t.tok == Tok::Dot) {
                        self.pos += 1;
                        return Ok(());
                    }
                }
                _ => return Err(syntax(sep.line, sep.column, "expected '.', ';' or ','")),
            }
        }
    }
}

/// Parses a document, expanding every prefixed name.
pub fn parse_turtle(text: &str) -> Result<Document, TurtleError> {
    parse_turtle_with(text, &mut Interner::new())
}

pub fn parse_turtle_with(text: &str, interner: &mut Interner) -> Result<Document, TurtleError> {
    let tokens = lex(text)?;
    let end = {
        let mut cur = Cursor::new(text);
        while cur.bump().is_some() {}
        (cur.line, cur.column)
    };
    let mut parser = Parser {
        tokens,
        pos: 0,
        prefixes: PrefixMap::new(),
        interner,
        end,
    };
    let mut triples = Vec::new();
    while let Some(first) = parser.peek().cloned() {
        parser.pos += 1;
        if first.tok == Tok::PrefixDirective {
            parser.prefix_directive()?;
        } else {
            parser.statement(first, &mut triples)?;
        }
    }
    Ok(Document {
        prefixes: parser.prefixes,
        triples,
    })
}

fn write_term(out: &mut String, term: &Term, prefixes: &PrefixMap) {
    match term {
        Term::Iri(iri) => match prefixes.compact(iri) {
            Some(pname) => out.push_str(&pname),
            None => {
                let _ = write!(out, "<{iri}>");
            }
        },
        Term::Literal { value, datatype } => {
            let _ = write!(out, "\"{}\"", escape_literal(value));
            if let Some(dt) = datatype {
                out.push_str("^^");
                write_term(out, &Term::Iri(dt.clone()), prefixes);
            }
        }
        Term::Variable(v) => {
            let _ = write!(out, "?{v}");
        }
    }
}

/// Writes prefix directives then the statements, sorted and grouped by
/// subject and predicate.
pub fn serialize_turtle(doc: &Document) -> String {
    let mut out = String::new();
    for (label, ns) in doc.prefixes.iter() {
        let _ = writeln!(out, "@prefix {label}: <{ns}> .");
    }
    let triples = doc.triple_set();
    if !doc.prefixes.is_empty() && !triples.is_empty() {
        out.push('\n');
    }
    let mut current_subject: Option<&Term> = None;
    let mut current_predicate: Option<&Term> = None;
    for t in &triples {
        if current_subject == Some(t.subject()) {
            if current_predicate == Some(t.predicate()) {
                out.push_str(" , ");
            } else {
                out.push_str(" ;\n    ");
                write_predicate(&mut out, t.predicate(), &doc.prefixes);
                out.push(' ');
            }
        } else {
            if current_subject.is_some() {
                out.push_str(" .\n");
            }
            write_term(&mut out, t.subject(), &doc.prefixes);
            out.push(' ');
            write_predicate(&mut out, t.predicate(), &doc.prefixes);
            out.push(' ');
        }
        write_term(&mut out, t.object(), &doc.prefixes);
        current_subject = Some(t.subject());
        current_predicate = Some(t.predicate());
    }
    if current_subject.is_some() {
        out.push_str(" .\n");
    }
    out
}

fn write_predicate(out: &mut String, predicate: &Term, prefixes: &PrefixMap) {
    if predicate.text() == vocab::RDF_TYPE {
        out.push('a');
    } else {
        write_term(out, predicate, prefixes);
    }
}

/// Sorted, de-duplicated N-Triples rendering, one statement per line.
pub fn canonical_ntriples<'a>(triples: impl IntoIterator<Item = &'a Triple>) -> String {
    let set: BTreeSet<String> = triples.into_iter().map(Triple::to_ntriples).collect();
    let mut out = String::new();
    for line in set {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// SHA-256 of the canonical N-Triples rendering, as 64 lowercase hex digits.
pub fn content_hash(doc: &Document) -> String {
    hash_triples(&doc.triples)
}

pub fn hash_triples<'a>(triples: impl IntoIterator<Item = &'a Triple>) -> String {
    hex::encode(Sha256::digest(canonical_ntriples(triples).as_bytes()))
}
