//! Random SELECT queries and a brute-force evaluator that tries every
//! assignment of store terms to the query variables.

use std::collections::{HashMap, HashSet};
use std::fmt::Write;

use agilekb_core::sparql::ResultTable;
use agilekb_core::{Term, Triple};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{terms_of, Vocab, NS};
use crate::order_key;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Slot {
    Var(String),
    Term(Term),
}

#[derive(Debug, Clone)]
pub enum FilterSpec {
    Eq(String, Term),
    Ne(String, Term),
    Contains(String, String),
    StartsWith(String, String),
    EndsWith(String, String),
}

impl FilterSpec {
    fn var(&self) -> &str {
        match self {
            FilterSpec::Eq(v, _)
            | FilterSpec::Ne(v, _)
            | FilterSpec::Contains(v, _)
            | FilterSpec::StartsWith(v, _)
            | FilterSpec::EndsWith(v, _) => v,
        }
    }

    fn holds(&self, t: &Term) -> bool {
        match self {
            FilterSpec::Eq(_, x) => t == x,
            FilterSpec::Ne(_, x) => t != x,
            FilterSpec::Contains(_, s) => t.text().contains(s.as_str()),
            FilterSpec::StartsWith(_, s) => t.text().starts_with(s.as_str()),
            FilterSpec::EndsWith(_, s) => t.text().ends_with(s.as_str()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuerySpec {
    /// `None` selects every variable.
    pub projection: Option<Vec<String>>,
    pub patterns: Vec<[Slot; 3]>,
    pub filters: Vec<FilterSpec>,
    pub distinct: bool,
    pub order: Option<(String, bool)>,
    pub limit: Option<usize>,
    pub use_prefix: bool,
}

fn term_text(t: &Term, use_prefix: bool) -> String {
    match t {
        Term::Iri(text) if use_prefix && text.starts_with(NS) && text[NS.len()..].chars().all(char::is_alphanumeric) => {
            format!("g:{}", &text[NS.len()..])
        }
        Term::Iri(text) => format!("<{text}>"),
        Term::Literal { value, datatype: Some(dt) } => format!("\"{value}\"^^<{dt}>"),
        Term::Literal { value, datatype: None } => format!("\"{value}\""),
        Term::Variable(v) => format!("?{v}"),
    }
}

impl QuerySpec {
    /// Variables in order of first occurrence in the patterns.
    pub fn variables(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for p in &self.patterns {
            for s in p {
                if let Slot::Var(v) = s {
                    if !out.contains(v) {
                        out.push(v.clone());
                    }
                }
            }
        }
        out
    }

    pub fn columns(&self) -> Vec<String> {
        self.projection.clone().unwrap_or_else(|| self.variables())
    }

    /// Renders the query with random but equivalent surface choices.
    pub fn to_sparql(&self, rng: &mut impl Rng) -> String {
        let mut q = String::new();
        if self.use_prefix {
            writeln!(q, "PREFIX g: <{NS}>").unwrap();
        }
        let kw = |rng: &mut dyn rand::RngCore, k: &str| if rng.gen_bool(0.5) { k.to_owned() } else { k.to_lowercase() };
        write!(q, "{} ", kw(rng, "SELECT")).unwrap();
        if self.distinct {
            write!(q, "{} ", kw(rng, "DISTINCT")).unwrap();
        }
        match &self.projection {
            None => q.push('*'),
            Some(vars) => q.push_str(&vars.iter().map(|v| format!("?{v}")).collect::<Vec<_>>().join(" ")),
        }
        writeln!(q, " {} {{", kw(rng, "WHERE")).unwrap();
        let slot = |s: &Slot| match s {
            Slot::Var(v) => format!("?{v}"),
            Slot::Term(t) => term_text(t, self.use_prefix),
        };
        let pats: Vec<String> = self
            .patterns
            .iter()
            .map(|p| format!("  {} {} {}", slot(&p[0]), slot(&p[1]), slot(&p[2])))
            .collect();
        q.push_str(&pats.join(" .\n"));
        if rng.gen_bool(0.3) {
            q.push_str(" .");
        }
        q.push('\n');
        for f in &self.filters {
            let body = match f {
                FilterSpec::Eq(v, t) => format!("?{v} = {}", term_text(t, self.use_prefix)),
                FilterSpec::Ne(v, t) => format!("?{v} != {}", term_text(t, self.use_prefix)),
                FilterSpec::Contains(v, s) => format!("regex(?{v}, \"{s}\")"),
                FilterSpec::StartsWith(v, s) => format!("regex(?{v}, \"^{s}\")"),
                FilterSpec::EndsWith(v, s) => format!("regex(?{v}, \"{s}$\")"),
            };
            writeln!(q, "  {}({body})", kw(rng, "FILTER")).unwrap();
        }
        q.push('}');
        if let Some((v, asc)) = &self.order {
            match (asc, rng.gen_bool(0.5)) {
                (true, true) => write!(q, " ORDER BY ?{v}").unwrap(),
                (true, false) => write!(q, " ORDER BY ASC(?{v})").unwrap(),
                (false, _) => write!(q, " ORDER BY DESC(?{v})").unwrap(),
            }
        }
        if let Some(n) = self.limit {
            write!(q, " LIMIT {n}").unwrap();
        }
        q
    }
}

const VARS: &[&str] = &["a", "b", "c", "d"];
const FRAGMENTS: &[&str] = &["alpha", "a", "bet", "e1", "e", "g", "max", "p0", "x"];

/// A query with at most `max_patterns` patterns over at most four variables.
pub fn random_query(rng: &mut impl Rng, vocab: &Vocab, max_patterns: usize) -> QuerySpec {
    let n_vars = rng.gen_range(1..=VARS.len());
    let pool = &VARS[..n_vars];
    let var = |rng: &mut dyn rand::RngCore| Slot::Var(pool[rng.gen_range(0..pool.len())].to_owned());
    let n = rng.gen_range(1..=max_patterns);
    let mut patterns = Vec::new();
    for _ in 0..n {
        let s = if rng.gen_bool(0.7) { var(rng) } else { Slot::Term(vocab.entity(rng)) };
        let p = if rng.gen_bool(0.4) {
            var(rng)
        } else if rng.gen_bool(0.05) {
            Slot::Term(vocab.entity(rng))
        } else {
            Slot::Term(vocab.predicate(rng))
        };
        let o = if rng.gen_bool(0.7) { var(rng) } else { Slot::Term(vocab.object(rng)) };
        patterns.push([s, p, o]);
    }
    finish(rng, vocab, patterns)
}

/// A query built around a witness: each pattern is an existing statement
/// with some positions abstracted to variables, and a variable always
/// stands for the same term, so the unfiltered query has a solution.
/// Falls back to [`random_query`] on an empty store.
pub fn anchored_query(rng: &mut impl Rng, vocab: &Vocab, triples: &[Triple], max_patterns: usize) -> QuerySpec {
    if triples.is_empty() {
        return random_query(rng, vocab, max_patterns);
    }
    let mut bound: Vec<(Term, String)> = Vec::new();
    let mut patterns = Vec::new();
    let mut prev: Option<&Triple> = None;
    for _ in 0..rng.gen_range(1..=max_patterns) {
        // prefer a statement sharing a term with the previous one
        let t = match prev {
            Some(p) if rng.gen_bool(0.8) => {
                let linked: Vec<&Triple> = triples
                    .iter()
                    .filter(|t| [t.subject(), t.object()].iter().any(|x| *x == p.subject() || *x == p.object()))
                    .collect();
                *linked.choose(rng).unwrap()
            }
            _ => triples.choose(rng).unwrap(),
        };
        prev = Some(t);
        let mut slot = |term: &Term, keep: f64| {
            if let Some((_, v)) = bound.iter().find(|(b, _)| b == term) {
                if rng.gen_bool(0.85) {
                    return Slot::Var(v.clone());
                }
            } else if bound.len() < VARS.len() && !rng.gen_bool(keep) {
                let v = VARS[bound.len()].to_owned();
                bound.push((term.clone(), v.clone()));
                return Slot::Var(v);
            }
            Slot::Term(term.clone())
        };
        let s = slot(t.subject(), 0.25);
        let p = slot(t.predicate(), 0.7);
        let o = slot(t.object(), 0.3);
        patterns.push([s, p, o]);
    }
    finish(rng, vocab, patterns)
}

/// Adds projection, filters, ordering and a limit to `patterns`.
fn finish(rng: &mut impl Rng, vocab: &Vocab, patterns: Vec<[Slot; 3]>) -> QuerySpec {
    let mut spec = QuerySpec {
        projection: None,
        patterns,
        filters: Vec::new(),
        distinct: rng.gen_bool(0.4),
        order: None,
        limit: None,
        use_prefix: rng.gen_bool(0.5),
    };
    let vars = spec.variables();
    if vars.is_empty() {
        // a fully ground query still needs something to select
        spec.patterns[0][0] = Slot::Var("a".into());
    }
    let vars = spec.variables();
    if rng.gen_bool(0.7) {
        let mut chosen: Vec<String> = vars.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect();
        if chosen.is_empty() {
            chosen.push(vars.choose(rng).unwrap().clone());
        }
        chosen.shuffle(rng);
        spec.projection = Some(chosen);
    }
    for _ in 0..rng.gen_range(0..=2) {
        let v = vars.choose(rng).unwrap().clone();
        let f = match rng.gen_range(0..5) {
            0 => FilterSpec::Eq(v, vocab.object(rng)),
            1 => FilterSpec::Ne(v, vocab.object(rng)),
            2 => FilterSpec::Contains(v, FRAGMENTS.choose(rng).unwrap().to_string()),
            3 => FilterSpec::StartsWith(v, ["http", "al", "b", "g"].choose(rng).unwrap().to_string()),
            _ => FilterSpec::EndsWith(v, ["1", "a", "e0", "x"].choose(rng).unwrap().to_string()),
        };
        spec.filters.push(f);
    }
    if rng.gen_bool(0.4) {
        let cols = spec.columns();
        spec.order = Some((cols.choose(rng).unwrap().clone(), rng.gen_bool(0.6)));
    }
    if rng.gen_bool(0.3) {
        spec.limit = Some(rng.gen_range(1..=12));
    }
    spec
}

/// Every projected row produced by a satisfying assignment, one per
/// assignment, before DISTINCT, ORDER BY and LIMIT.
pub fn brute_force(triples: &[Triple], q: &QuerySpec) -> Vec<Vec<Term>> {
    let domain = terms_of(triples);
    let index: HashMap<&Term, usize> = domain.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let facts: HashSet<[usize; 3]> = triples
        .iter()
        .map(|t| [index[t.subject()], index[t.predicate()], index[t.object()]])
        .collect();
    let vars = q.variables();
    let var_pos = |v: &str| vars.iter().position(|x| x == v).unwrap();
    // each slot: Ok(var index) or Err(term index), None for a constant absent from the store
    let mut compiled: Vec<[Result<usize, usize>; 3]> = Vec::new();
    for p in &q.patterns {
        let mut c = [Ok(0); 3];
        for (i, s) in p.iter().enumerate() {
            c[i] = match s {
                Slot::Var(v) => Ok(var_pos(v)),
                Slot::Term(t) => match index.get(t) {
                    Some(&ix) => Err(ix),
                    None => return Vec::new(),
                },
            };
        }
        compiled.push(c);
    }
    if domain.is_empty() {
        return Vec::new();
    }
    let columns: Vec<usize> = q.columns().iter().map(|c| var_pos(c)).collect();
    let filters: Vec<(usize, &FilterSpec)> = q.filters.iter().map(|f| (var_pos(f.var()), f)).collect();

    let mut rows = Vec::new();
    let mut assignment = vec![0usize; vars.len()];
    loop {
        let ok = compiled.iter().all(|c| {
            let pick = |s: &Result<usize, usize>| match s {
                Ok(v) => assignment[*v],
                Err(t) => *t,
            };
            facts.contains(&[pick(&c[0]), pick(&c[1]), pick(&c[2])])
        }) && filters.iter().all(|(v, f)| f.holds(&domain[assignment[*v]]));
        if ok {
            rows.push(columns.iter().map(|&c| domain[assignment[c]].clone()).collect());
        }
        // odometer step
        let mut i = 0;
        loop {
            if i == assignment.len() {
                return rows;
            }
            assignment[i] += 1;
            if assignment[i] < domain.len() {
                break;
            }
            assignment[i] = 0;
            i += 1;
        }
    }
}

fn sorted(mut rows: Vec<Vec<Term>>) -> Vec<Vec<Term>> {
    rows.sort();
    rows
}

fn sub_multiset(small: &[Vec<Term>], big: &[Vec<Term>]) -> bool {
    let mut counts: HashMap<&Vec<Term>, isize> = HashMap::new();
    for r in big {
        *counts.entry(r).or_default() += 1;
    }
    for r in small {
        let c = counts.entry(r).or_default();
        *c -= 1;
        if *c < 0 {
            return false;
        }
    }
    true
}

/// Checks an engine result against the brute-force rows for `q`.
pub fn compare(q: &QuerySpec, oracle_rows: Vec<Vec<Term>>, got: &ResultTable) -> Result<(), String> {
    let columns = q.columns();
    if got.columns != columns {
        return Err(format!("columns {:?}, expected {:?}", got.columns, columns));
    }
    if got.rows.iter().any(|r| r.len() != columns.len()) {
        return Err("row width differs from column count".into());
    }
    let mut expected = oracle_rows;
    if q.distinct {
        expected = sorted(expected);
        expected.dedup();
        let mut seen = HashSet::new();
        if !got.rows.iter().all(|r| seen.insert(r)) {
            return Err("duplicate rows under DISTINCT".into());
        }
    }
    let key_col = q.order.as_ref().map(|(v, asc)| (columns.iter().position(|c| c == v).unwrap(), *asc));
    if let Some((col, asc)) = key_col {
        let keys: Vec<_> = got.rows.iter().map(|r| order_key(&r[col])).collect();
        let ordered = keys.windows(2).all(|w| if asc { w[0] <= w[1] } else { w[0] >= w[1] });
        if !ordered {
            return Err("rows not in ORDER BY order".into());
        }
    }
    match q.limit {
        None => {
            if sorted(got.rows.clone()) != sorted(expected.clone()) {
                return Err(format!("got {} rows, expected {}", got.rows.len(), expected.len()));
            }
        }
        Some(n) => {
            if got.rows.len() != n.min(expected.len()) {
                return Err(format!("LIMIT {n}: got {} rows of {}", got.rows.len(), expected.len()));
            }
            if !sub_multiset(&got.rows, &expected) {
                return Err("LIMIT rows are not drawn from the full result".into());
            }
            if let Some((col, asc)) = key_col {
                let mut keys: Vec<_> = expected.iter().map(|r| order_key(&r[col])).collect();
                keys.sort();
                if !asc {
                    keys.reverse();
                }
                let got_keys: Vec<_> = got.rows.iter().map(|r| order_key(&r[col])).collect();
                if got_keys[..] != keys[..got_keys.len()] {
                    return Err("LIMIT result is not a prefix of the ordered result".into());
                }
            }
        }
    }
    Ok(())
}
