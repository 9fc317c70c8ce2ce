//! The SELECT subset used by concern queries.
//!
//! ```text
//! PREFIX label: <iri>
//! SELECT [DISTINCT] (?v ... | *) [WHERE] { pattern ('.' pattern)* (FILTER(expr))* }
//! [ORDER BY [ASC|DESC](?v)] [LIMIT n]
//! ```
//!
//! Filter expressions are `?v = term`, `?v != term` and
//! `regex(?v, "pattern")`. Keywords are case-insensitive.
//!
//! Regex patterns are compiled with the `regex` crate. Queries shipped with
//! the project stick to literal text, character classes, anchors and `.*`;
//! look-around and back-references are not available.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::StoreError;
use crate::store::Graph;
use crate::term::{vocab, Interner, Term, TriplePattern};
use crate::turtle::{self, Cursor, PrefixMap};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("query syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown prefix {0:?}")]
    UnknownPrefix(String),
    #[error("variable ?{0} does not occur in the graph patterns")]
    UnboundVariable(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    All,
    Variables(Vec<String>),
}

#[derive(Debug, Clone)]
pub enum FilterExpr {
    Equals(String, Term),
    NotEquals(String, Term),
    Regex(String, regex::Regex),
}

impl FilterExpr {
    pub fn variable(&self) -> &str {
        match self {
            FilterExpr::Equals(v, _) | FilterExpr::NotEquals(v, _) | FilterExpr::Regex(v, _) => v,
        }
    }

    fn accepts(&self, term: &Term) -> bool {
        match self {
            FilterExpr::Equals(_, t) => term == t,
            FilterExpr::NotEquals(_, t) => term != t,
            FilterExpr::Regex(_, re) => re.is_match(term.text()),
        }
    }
}

impl PartialEq for FilterExpr {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (FilterExpr::Equals(a, x), FilterExpr::Equals(b, y)) => a == b && x == y,
            (FilterExpr::NotEquals(a, x), FilterExpr::NotEquals(b, y)) => a == b && x == y,
            (FilterExpr::Regex(a, x), FilterExpr::Regex(b, y)) => a == b && x.as_str() == y.as_str(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderBy {
    pub variable: String,
    pub ascending: bool,
}

/// A parsed query: prefixes, what to return, the triple patterns and the
/// modifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub prefixes: PrefixMap,
    pub projection: Projection,
    pub patterns: Vec<TriplePattern>,
    pub filters: Vec<FilterExpr>,
    pub distinct: bool,
    pub order_by: Option<OrderBy>,
    pub limit: Option<usize>,
}

impl Query {
    /// Variables in order of first appearance in the patterns.
    pub fn pattern_variables(&self) -> Vec<String> {
        let mut vars: Vec<String> = Vec::new();
        for p in &self.patterns {
            for v in p.variables() {
                if !vars.iter().any(|x| x == v) {
                    vars.push(v.to_owned());
                }
            }
        }
        vars
    }

    /// Result column names.
    pub fn columns(&self) -> Vec<String> {
        match &self.projection {
            Projection::All => self.pattern_variables(),
            Projection::Variables(vars) => vars.clone(),
        }
    }
}

/// Tabular query result.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Term>>,
}

impl ResultTable {
    pub fn empty(columns: Vec<String>) -> Self {
        ResultTable {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Cells of one column, in row order.
    pub fn column(&self, name: &str) -> Option<Vec<&Term>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[idx]).collect())
    }

    /// The documented JSON encoding: `{"columns":[...],"rows":[[term,...],...]}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("tables always serialize")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Iri(String),
    PName(String, String),
    Var(String),
    Str(String),
    Int(usize),
    Punct(&'static str),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "{w}"),
            Tok::Iri(i) => write!(f, "<{i}>"),
            Tok::PName(l, n) => write!(f, "{l}:{n}"),
            Tok::Var(v) => write!(f, "?{v}"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::Int(n) => write!(f, "{n}"),
            Tok::Punct(p) => write!(f, "{p}"),
        }
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> QueryError {
    QueryError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Spanned>, QueryError> {
    let mut cur = Cursor::new(text);
    let mut out = Vec::new();
    loop {
        cur.skip_trivia();
        let (line, column) = (cur.line, cur.column);
        let Some(c) = cur.peek() else { break };
        let tok = match c {
            '<' => Tok::Iri(turtle::lex_iri(&mut cur).map_err(|(l, c, m)| syntax(l, c, m))?),
            '"' => Tok::Str(turtle::lex_string(&mut cur).map_err(|(l, c, m)| syntax(l, c, m))?),
            '?' | '$' => {
                cur.bump();
                let name = cur.take_name();
                if name.is_empty() || name.contains('.') || name.contains('-') {
                    return Err(syntax(line, column, "invalid variable name"));
                }
                Tok::Var(name)
            }
            '!' => {
                cur.bump();
                if cur.bump() != Some('=') {
                    return Err(syntax(line, column, "expected '!='"));
                }
                Tok::Punct("!=")
            }
            '^' => {
                cur.bump();
                if cur.bump() != Some('^') {
                    return Err(syntax(line, column, "expected '^^'"));
                }
                Tok::Punct("^^")
            }
            '{' | '}' | '(' | ')' | '.' | ',' | '*' | '=' => {
                cur.bump();
                Tok::Punct(match c {
                    '{' => "{",
                    '}' => "}",
                    '(' => "(",
                    ')' => ")",
                    '.' => ".",
                    ',' => ",",
                    '*' => "*",
                    _ => "=",
                })
            }
            c if c.is_ascii_digit() => {
                let mut digits = String::new();
                while let Some(d) = cur.peek().filter(char::is_ascii_digit) {
                    digits.push(d);
                    cur.bump();
                }
                Tok::Int(digits.parse().map_err(|_| syntax(line, column, "integer out of range"))?)
            }
            c if c == ':' || c.is_alphabetic() => {
                let word = if c == ':' { String::new() } else { cur.take_name() };
                if cur.peek() == Some(':') {
                    cur.bump();
                    let local = if cur.peek().is_some_and(|c| c.is_alphanumeric() || c == '_') {
                        cur.take_name()
                    } else {
                        String::new()
                    };
                    Tok::PName(word, local)
                } else {
                    Tok::Word(word)
                }
            }
            c => return Err(syntax(line, column, format!("unexpected character {c:?}"))),
        };
        out.push(Spanned { tok, line, column });
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    prefixes: PrefixMap,
    interner: Interner,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|s| &s.tok)
    }

    fn peek_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if w.eq_ignore_ascii_case(kw))
    }

    fn here(&self) -> (usize, usize) {
        self.tokens.get(self.pos).map_or(self.end, |s| (s.line, s.column))
    }

    fn error(&self, message: impl Into<String>) -> QueryError {
        let (line, column) = self.here();
        syntax(line, column, message)
    }

    fn next(&mut self, expected: &str) -> Result<Tok, QueryError> {
        match self.tokens.get(self.pos) {
            Some(s) => {
                self.pos += 1;
                Ok(s.tok.clone())
            }
            None => Err(self.error(format!("unexpected end of query, expected {expected}"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), QueryError> {
        if self.peek_keyword(kw) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {kw}")))
        }
    }

    fn punct(&mut self, p: &str) -> Result<(), QueryError> {
        if self.peek() == Some(&Tok::Punct(match p {
            "{" => "{",
            "}" => "}",
            "(" => "(",
            ")" => ")",
            "," => ",",
            _ => ".",
        })) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected '{p}'")))
        }
    }

    fn eat_punct(&mut self, p: &'static str) -> bool {
        if self.peek() == Some(&Tok::Punct(p)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn iri(&mut self, tok: Tok) -> Result<Term, QueryError> {
        let iri = match tok {
            Tok::Iri(iri) => iri,
            Tok::PName(label, local) => self
                .prefixes
                .expand(&label, &local)
                .ok_or(QueryError::UnknownPrefix(label))?,
            Tok::Word(w) if w == "a" => vocab::RDF_TYPE.to_owned(),
            other => {
                self.pos -= 1;
                return Err(self.error(format!("expected an IRI, found {other}")));
            }
        };
        self.interner.iri(&iri).map_err(|e| self.error(e.to_string()))
    }

    fn term(&mut self, allow_var: bool) -> Result<Term, QueryError> {
        let tok = self.next("a term")?;
        match tok {
            Tok::Var(v) if allow_var => Ok(Term::variable(v).expect("non-empty")),
            Tok::Str(value) => {
                let datatype = if self.eat_punct("^^") {
                    let dt = self.next("datatype IRI")?;
                    Some(self.iri(dt)?)
                } else {
                    None
                };
                self.interner
                    .literal(&value, datatype.as_ref().map(Term::text))
                    .map_err(|e| self.error(e.to_string()))
            }
            other => self.iri(other),
        }
    }

    fn pattern(&mut self) -> Result<TriplePattern, QueryError> {
        let start = self.pos;
        let s = self.term(true)?;
        let p = self.term(true)?;
        let o = self.term(true)?;
        if s.is_literal() || p.is_literal() {
            self.pos = start;
            return Err(self.error("literal in subject or predicate position"));
        }
        Ok(TriplePattern::new(s, p, o))
    }

    fn variable(&mut self) -> Result<String, QueryError> {
        match self.next("a variable")? {
            Tok::Var(v) => Ok(v),
            other => {
                self.pos -= 1;
                Err(self.error(format!("expected a variable, found {other}")))
            }
        }
    }

    fn filter(&mut self) -> Result<FilterExpr, QueryError> {
        self.punct("(")?;
        let expr = if self.peek_keyword("regex") {
            self.pos += 1;
            self.punct("(")?;
            let var = self.variable()?;
            self.punct(",")?;
            let pattern = match self.next("a regex string")? {
                Tok::Str(s) => s,
                other => {
                    self.pos -= 1;
                    return Err(self.error(format!("expected a regex string, found {other}")));
                }
            };
            let re = regex::Regex::new(&pattern).map_err(|e| self.error(format!("invalid regex: {e}")))?;
            self.punct(")")?;
            FilterExpr::Regex(var, re)
        } else {
            let var = self.variable()?;
            let op = self.next("'=' or '!='")?;
            let term = self.term(false)?;
            match op {
                Tok::Punct("=") => FilterExpr::Equals(var, term),
                Tok::Punct("!=") => FilterExpr::NotEquals(var, term),
                _ => return Err(self.error("expected '=' or '!='")),
            }
        };
        self.punct(")")?;
        Ok(expr)
    }

    fn query(&mut self) -> Result<Query, QueryError> {
        while self.peek_keyword("PREFIX") {
            self.pos += 1;
            let Tok::PName(label, local) = self.next("prefix label")? else {
                self.pos -= 1;
                return Err(self.error("expected prefix label"));
            };
            if !local.is_empty() {
                self.pos -= 1;
                return Err(self.error("expected prefix label"));
            }
            let Tok::Iri(ns) = self.next("namespace IRI")? else {
                self.pos -= 1;
                return Err(self.error("expected namespace IRI"));
            };
            if !self.prefixes.insert(label, ns) {
                return Err(self.error("invalid prefix declaration"));
            }
        }
        self.keyword("SELECT")?;
        let distinct = if self.peek_keyword("DISTINCT") {
            self.pos += 1;
            true
        } else {
            false
        };
        let projection = if self.eat_punct("*") {
            Projection::All
        } else {
            let mut vars = Vec::new();
            while let Some(Tok::Var(v)) = self.peek() {
                vars.push(v.clone());
                self.pos += 1;
            }
            if vars.is_empty() {
                return Err(self.error("expected projection variables or '*'"));
            }
            Projection::Variables(vars)
        };
        if self.peek_keyword("WHERE") {
            self.pos += 1;
        }
        self.punct("{")?;
        let mut patterns = Vec::new();
        let mut filters = Vec::new();
        let mut after_pattern = false;
        loop {
            if self.eat_punct("}") {
                break;
            }
            if self.eat_punct(".") {
                after_pattern = false;
                continue;
            }
            if self.peek_keyword("FILTER") {
                self.pos += 1;
                filters.push(self.filter()?);
                after_pattern = false;
                continue;
            }
            if after_pattern {
                return Err(self.error("expected '.' between patterns"));
            }
            patterns.push(self.pattern()?);
            after_pattern = true;
        }
        if patterns.is_empty() {
            return Err(self.error("at least one triple pattern is required"));
        }
        let mut order_by = None;
        if self.peek_keyword("ORDER") {
            self.pos += 1;
            self.keyword("BY")?;
            let ascending = if self.peek_keyword("ASC") {
                self.pos += 1;
                true
            } else if self.peek_keyword("DESC") {
                self.pos += 1;
                false
            } else {
                true
            };
            let variable = if self.eat_punct("(") {
                let v = self.variable()?;
                self.punct(")")?;
                v
            } else {
                self.variable()?
            };
            order_by = Some(OrderBy { variable, ascending });
        }
        let mut limit = None;
        if self.peek_keyword("LIMIT") {
            self.pos += 1;
            match self.next("a positive integer")? {
                Tok::Int(n) if n > 0 => limit = Some(n),
                _ => {
                    self.pos -= 1;
                    return Err(self.error("LIMIT needs a positive integer"));
                }
            }
        }
        if self.pos < self.tokens.len() {
            return Err(self.error(format!("unexpected {}", self.tokens[self.pos].tok)));
        }
        Ok(Query {
            prefixes: std::mem::take(&mut self.prefixes),
            projection,
            patterns,
            filters,
            distinct,
            order_by,
            limit,
        })
    }
}

/// Parses query text and checks that every projected, ordered or filtered
/// variable occurs in the patterns.
pub fn parse_query(text: &str) -> Result<Query, QueryError> {
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
        interner: Interner::new(),
        end,
    };
    let query = parser.query()?;
    let bound: HashSet<String> = query.pattern_variables().into_iter().collect();
    let mut used: Vec<&str> = Vec::new();
    if let Projection::Variables(vars) = &query.projection {
        used.extend(vars.iter().map(String::as_str));
    }
    if let Some(order) = &query.order_by {
        used.push(&order.variable);
    }
    used.extend(query.filters.iter().map(FilterExpr::variable));
    if let Some(missing) = used.into_iter().find(|v| !bound.contains(*v)) {
        return Err(QueryError::UnboundVariable(missing.to_owned()));
    }
    Ok(query)
}

/// Join order: start from the pattern with the fewest variables, then keep
/// taking the pattern with the fewest still-unbound variables, preferring
/// patterns connected to what is already bound. Ties keep query order.
fn plan(patterns: &[TriplePattern]) -> Vec<usize> {
    let mut remaining: Vec<usize> = (0..patterns.len()).collect();
    let mut bound: HashSet<&str> = HashSet::new();
    let mut order = Vec::with_capacity(patterns.len());
    while !remaining.is_empty() {
        let best = remaining
            .iter()
            .enumerate()
            .min_by_key(|(_, &i)| {
                let vars = patterns[i].variables();
                let unbound = vars.iter().filter(|v| !bound.contains(*v)).count();
                let connected = bound.is_empty() || vars.iter().any(|v| bound.contains(v)) || vars.is_empty();
                (!connected, unbound, i)
            })
            .map(|(pos, _)| pos)
            .expect("non-empty");
        let i = remaining.remove(best);
        bound.extend(patterns[i].variables());
        order.push(i);
    }
    order
}

/// Evaluates the query: conjunctive join of the patterns, filters, ORDER BY
/// (stable), projection, DISTINCT (first occurrence kept), LIMIT.
pub fn evaluate<G: Graph + ?Sized>(graph: &G, query: &Query) -> Result<ResultTable, QueryError> {
    let vars = query.pattern_variables();
    let slot = |name: &str| vars.iter().position(|v| v == name).expect("checked at parse time");

    let mut solutions: Vec<Vec<Option<Term>>> = vec![vec![None; vars.len()]];
    for i in plan(&query.patterns) {
        let pattern = &query.patterns[i];
        let slots: Vec<Option<usize>> = pattern
            .positions()
            .iter()
            .map(|t| match t {
                Term::Variable(v) => Some(slot(v)),
                _ => None,
            })
            .collect();
        let mut next = Vec::new();
        for sol in &solutions {
            let bind = |t: &Term, s: Option<usize>| match s.and_then(|s| sol[s].clone()) {
                Some(value) => value,
                None => t.clone(),
            };
            let probe = TriplePattern::new(
                bind(&pattern.subject, slots[0]),
                bind(&pattern.predicate, slots[1]),
                bind(&pattern.object, slots[2]),
            );
            'triples: for t in graph.match_pattern(&probe)? {
                let mut extended = sol.clone();
                for (s, value) in slots.iter().zip([t.subject(), t.predicate(), t.object()]) {
                    if let Some(s) = *s {
                        match &extended[s] {
                            Some(existing) if existing != value => continue 'triples,
                            Some(_) => {}
                            None => extended[s] = Some(value.clone()),
                        }
                    }
                }
                next.push(extended);
            }
        }
        solutions = next;
        if solutions.is_empty() {
            break;
        }
    }

    let filters: Vec<(usize, &FilterExpr)> = query.filters.iter().map(|f| (slot(f.variable()), f)).collect();
    solutions.retain(|sol| {
        filters
            .iter()
            .all(|(s, f)| sol[*s].as_ref().is_some_and(|t| f.accepts(t)))
    });

    if let Some(order) = &query.order_by {
        let s = slot(&order.variable);
        solutions.sort_by(|a, b| {
            let ord = a[s].cmp(&b[s]);
            if order.ascending {
                ord
            } else {
                ord.reverse()
            }
        });
    }

    let columns = query.columns();
    let column_slots: Vec<usize> = columns.iter().map(|c| slot(c)).collect();
    let mut rows: Vec<Vec<Term>> = solutions
        .into_iter()
        .map(|sol| {
            column_slots
                .iter()
                .map(|&s| sol[s].clone().expect("every pattern variable is bound"))
                .collect()
        })
        .collect();
    if query.distinct {
        let mut seen = HashSet::new();
        rows.retain(|row| seen.insert(row.clone()));
    }
    if let Some(limit) = query.limit {
        rows.truncate(limit);
    }
    Ok(ResultTable { columns, rows })
}
