//! Horn rules over triples, semi-naive saturation and derivation traces.
//!
//! Rule file format, one rule per `RULE` keyword (a rule may wrap lines):
//!
//! ```text
//! @prefix : <http://obama.kb/onto#> .
//! # comment
//! RULE inv: IF (?x :achieve ?y) THEN (?y :achievedBy ?x)
//! ```
//!
//! Positions are full IRIs, prefixed names, `a` (for `rdf:type`) or
//! `?variables`. Keywords are case-insensitive.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::error::StoreError;
use crate::store::{Graph, GraphMut, TripleStore};
use crate::term::{vocab, Interner, Term, Triple, TriplePattern};
use crate::turtle::{self, Cursor, PrefixMap};

/// Default cap on the number of statements one saturation may derive.
pub const DEFAULT_DERIVATION_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown prefix {label:?} at line {line}")]
    UnknownPrefix { label: String, line: usize },
    #[error("unsafe rule {rule}: head variable ?{variable} does not occur in the body")]
    UnsafeRule { rule: String, variable: String },
    #[error("duplicate rule name {0}")]
    DuplicateRule(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReasonError {
    #[error("saturation derived more than {limit} statements")]
    ResourceLimit { limit: usize },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("statement not in store: {0}")]
    NotFound(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    name: String,
    body: Vec<TriplePattern>,
    head: Vec<TriplePattern>,
}

impl Rule {
    /// Checks range restriction: every head variable occurs in the body.
    pub fn new(name: impl Into<String>, body: Vec<TriplePattern>, head: Vec<TriplePattern>) -> Result<Rule, RuleError> {
        let name = name.into();
        if body.is_empty() || head.is_empty() {
            return Err(RuleError::Syntax {
                line: 0,
                message: format!("rule {name} needs at least one body and one head atom"),
            });
        }
        let body_vars: HashSet<&str> = body.iter().flat_map(|p| p.variables()).collect();
        for atom in &head {
            if let Some(missing) = atom.variables().into_iter().find(|v| !body_vars.contains(v)) {
                return Err(RuleError::UnsafeRule {
                    rule: name,
                    variable: missing.to_owned(),
                });
            }
        }
        Ok(Rule { name, body, head })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn body(&self) -> &[TriplePattern] {
        &self.body
    }

    pub fn head(&self) -> &[TriplePattern] {
        &self.head
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleSet {
    rules: Vec<Rule>,
}

impl RuleSet {
    pub fn new(rules: Vec<Rule>) -> Result<RuleSet, RuleError> {
        let mut seen = HashSet::new();
        for rule in &rules {
            if !seen.insert(rule.name.as_str()) {
                return Err(RuleError::DuplicateRule(rule.name.clone()));
            }
        }
        Ok(RuleSet { rules })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Prefix,
    Rule,
    If,
    And,
    Then,
    Open,
    Close,
    Dot,
    A,
    Iri(String),
    PName(String, String),
    Var(String),
}

fn lex_rules(text: &str) -> Result<Vec<(Tok, usize)>, RuleError> {
    let mut cur = Cursor::new(text);
    let mut out = Vec::new();
    let err = |line: usize, message: String| RuleError::Syntax { line, message };
    loop {
        cur.skip_trivia();
        let line = cur.line;
        let Some(c) = cur.peek() else { break };
        let tok = match c {
            '(' | ')' | '.' => {
                cur.bump();
                match c {
                    '(' => Tok::Open,
                    ')' => Tok::Close,
                    _ => Tok::Dot,
                }
            }
            '<' => Tok::Iri(turtle::lex_iri(&mut cur).map_err(|(l, _, m)| err(l, m))?),
            '?' => {
                cur.bump();
                let name = cur.take_name();
                if name.is_empty() {
                    return Err(err(line, "expected variable name after '?'".into()));
                }
                Tok::Var(name)
            }
            '@' => {
                cur.bump();
                let word = cur.take_name();
                if word != "prefix" {
                    return Err(err(line, format!("unsupported directive @{word}")));
                }
                Tok::Prefix
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
                    match word.to_ascii_uppercase().as_str() {
                        "RULE" => Tok::Rule,
                        "IF" => Tok::If,
                        "AND" => Tok::And,
                        "THEN" => Tok::Then,
                        _ if word == "a" => Tok::A,
                        _ => return Err(err(line, format!("unexpected word {word:?}"))),
                    }
                }
            }
            c => return Err(err(line, format!("unexpected character {c:?}"))),
        };
        out.push((tok, line));
    }
    Ok(out)
}

struct RuleParser<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    prefixes: PrefixMap,
    interner: &'a mut Interner,
    last_line: usize,
}

impl RuleParser<'_> {
    fn next(&mut self, expected: &str) -> Result<(Tok, usize), RuleError> {
        let t = self.tokens.get(self.pos).cloned().ok_or_else(|| RuleError::Syntax {
            line: self.last_line,
            message: format!("unexpected end of input, expected {expected}"),
        })?;
        self.pos += 1;
        Ok(t)
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn expect(&mut self, want: Tok, expected: &str) -> Result<(), RuleError> {
        let (tok, line) = self.next(expected)?;
        if tok != want {
            return Err(RuleError::Syntax {
                line,
                message: format!("expected {expected}"),
            });
        }
        Ok(())
    }

    fn position(&mut self) -> Result<Term, RuleError> {
        let (tok, line) = self.next("a term")?;
        let term = match tok {
            Tok::Var(name) => Term::variable(name).expect("lexer guarantees a name"),
            Tok::A => self.interner.iri(vocab::RDF_TYPE).expect("valid IRI"),
            Tok::Iri(iri) => self.interner.iri(&iri).map_err(|e| RuleError::Syntax {
                line,
                message: e.to_string(),
            })?,
            Tok::PName(label, local) => {
                let iri = self
                    .prefixes
                    .expand(&label, &local)
                    .ok_or(RuleError::UnknownPrefix { label, line })?;
                self.interner.iri(&iri).map_err(|e| RuleError::Syntax {
                    line,
                    message: e.to_string(),
                })?
            }
            other => {
                return Err(RuleError::Syntax {
                    line,
                    message: format!("expected a term, found {other:?}"),
                })
            }
        };
        Ok(term)
    }

    fn atom(&mut self) -> Result<TriplePattern, RuleError> {
        self.expect(Tok::Open, "'('")?;
        let s = self.position()?;
        let p = self.position()?;
        let o = self.position()?;
        self.expect(Tok::Close, "')'")?;
        Ok(TriplePattern::new(s, p, o))
    }

    fn conjunction(&mut self) -> Result<Vec<TriplePattern>, RuleError> {
        let mut atoms = vec![self.atom()?];
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            atoms.push(self.atom()?);
        }
        Ok(atoms)
    }

    fn rule(&mut self) -> Result<Rule, RuleError> {
        let (tok, line) = self.next("rule name")?;
        let Tok::PName(name, local) = tok else {
            return Err(RuleError::Syntax {
                line,
                message: "expected rule name followed by ':'".into(),
            });
        };
        if !local.is_empty() || name.is_empty() {
            return Err(RuleError::Syntax {
                line,
                message: "expected rule name followed by ':'".into(),
            });
        }
        self.expect(Tok::If, "IF")?;
        let body = self.conjunction()?;
        self.expect(Tok::Then, "THEN")?;
        let head = self.conjunction()?;
        Rule::new(name, body, head)
    }
}

/// Parses a rule file.
pub fn parse_rules(text: &str) -> Result<RuleSet, RuleError> {
    parse_rules_with(text, &mut Interner::new())
}

pub fn parse_rules_with(text: &str, interner: &mut Interner) -> Result<RuleSet, RuleError> {
    let tokens = lex_rules(text)?;
    let last_line = text.lines().count().max(1);
    let mut parser = RuleParser {
        tokens,
        pos: 0,
        prefixes: PrefixMap::new(),
        interner,
        last_line,
    };
    let mut rules = Vec::new();
    while let Some((tok, line)) = parser.tokens.get(parser.pos).cloned() {
        parser.pos += 1;
        match tok {
            Tok::Prefix => {
                let (label, line) = parser.next("prefix label")?;
                let Tok::PName(label, local) = label else {
                    return Err(RuleError::Syntax {
                        line,
                        message: "expected prefix label".into(),
                    });
                };
                let (ns, line) = parser.next("namespace IRI")?;
                let Tok::Iri(ns) = ns else {
                    return Err(RuleError::Syntax {
                        line,
                        message: "expected namespace IRI".into(),
                    });
                };
                if !local.is_empty() || !parser.prefixes.insert(label, ns) {
                    return Err(RuleError::Syntax {
                        line,
                        message: "invalid prefix directive".into(),
                    });
                }
                parser.expect(Tok::Dot, "'.' after prefix directive")?;
            }
            Tok::Rule => rules.push(parser.rule()?),
            other => {
                return Err(RuleError::Syntax {
                    line,
                    message: format!("expected RULE or @prefix, found {other:?}"),
                })
            }
        }
    }
    RuleSet::new(rules)
}

/// Variable bindings built while joining rule bodies.
type Binding = Vec<(Arc<str>, Term)>;

fn lookup<'b>(binding: &'b Binding, name: &str) -> Option<&'b Term> {
    binding.iter().find(|(n, _)| &**n == name).map(|(_, t)| t)
}

/// Replaces bound variables in the pattern.
fn substitute(pattern: &TriplePattern, binding: &Binding) -> TriplePattern {
    let sub = |t: &Term| match t {
        Term::Variable(v) => lookup(binding, v).cloned().unwrap_or_else(|| t.clone()),
        _ => t.clone(),
    };
    TriplePattern::new(sub(&pattern.subject), sub(&pattern.predicate), sub(&pattern.object))
}

/// Extends the binding so that the pattern matches the triple, if possible.
fn unify(pattern: &TriplePattern, triple: &Triple, binding: &Binding) -> Option<Binding> {
    let mut out = binding.clone();
    for (p, t) in pattern.positions().into_iter().zip([triple.subject(), triple.predicate(), triple.object()]) {
        match p {
            Term::Variable(v) => match lookup(&out, v) {
                Some(bound) if bound != t => return None,
                Some(_) => {}
                None => out.push((v.clone(), t.clone())),
            },
            _ if p != t => return None,
            _ => {}
        }
    }
    Some(out)
}

fn instantiate(pattern: &TriplePattern, binding: &Binding) -> Option<Triple> {
    let p = substitute(pattern, binding);
    // A variable bound to a literal cannot stand in subject or predicate position.
    Triple::new(p.subject, p.predicate, p.object).ok()
}

/// Joins `atoms` left to right against `graph`, starting from `seed`.
fn join<G: Graph + ?Sized>(graph: &G, atoms: &[&TriplePattern], seed: Binding) -> Result<Vec<Binding>, StoreError> {
    let mut bindings = vec![seed];
    for atom in atoms {
        let mut next = Vec::new();
        for b in &bindings {
            for t in graph.match_pattern(&substitute(atom, b))? {
                if let Some(extended) = unify(atom, &t, b) {
                    next.push(extended);
                }
            }
        }
        bindings = next;
        if bindings.is_empty() {
            break;
        }
    }
    Ok(bindings)
}

/// Outcome of a saturation: the statements it added and the round in which
/// each was first derived. Rounds of a layered saturation continue the
/// numbering of the layer below.
#[derive(Debug, Clone, Default)]
pub struct Saturation {
    derived: BTreeSet<Triple>,
    rounds: HashMap<Triple, u32>,
    last_round: u32,
    parent: Option<Arc<Saturation>>,
}

impl Saturation {
    /// Statements added by this saturation (not including lower layers).
    pub fn derived(&self) -> &BTreeSet<Triple> {
        &self.derived
    }

    pub fn into_derived(self) -> BTreeSet<Triple> {
        self.derived
    }

    /// Round of first derivation, looking through lower layers. `None`
    /// means the statement was asserted (or is absent).
    pub fn round(&self, t: &Triple) -> Option<u32> {
        self.rounds
            .get(t)
            .copied()
            .or_else(|| self.parent.as_ref().and_then(|p| p.round(t)))
    }

    pub fn is_derived(&self, t: &Triple) -> bool {
        self.round(t).is_some()
    }

    pub fn last_round(&self) -> u32 {
        self.last_round
    }
}

/// Saturates the store with the rules; see [`saturate_with`].
pub fn saturate<G: GraphMut + ?Sized>(store: &mut G, rules: &RuleSet) -> Result<Saturation, ReasonError> {
    let initial = store.triples()?;
    saturate_with(store, rules, initial, None, DEFAULT_DERIVATION_LIMIT)
}

/// Semi-naive saturation.
///
/// `delta` holds the statements not yet joined against the rules. When the
/// store minus `delta` is already closed under the rules (the state
/// `parent` describes), passing only the new statements is enough; passing
/// every statement is always correct.
///
/// Each round joins every rule with at least one atom drawn from the
/// previous round's new statements, then inserts what it derived. Fails with
/// [`ReasonError::ResourceLimit`] once more than `limit` statements were
/// derived; the statements of completed rounds stay in the store.
pub fn saturate_with<G: GraphMut + ?Sized>(
    store: &mut G,
    rules: &RuleSet,
    delta: impl IntoIterator<Item = Triple>,
    parent: Option<Arc<Saturation>>,
    limit: usize,
) -> Result<Saturation, ReasonError> {
    let mut delta = TripleStore::from_triples(delta);
    let mut round = parent.as_ref().map_or(0, |p| p.last_round);
    let mut sat = Saturation {
        last_round: round,
        parent,
        ..Saturation::default()
    };
    while !delta.is_empty() && !rules.is_empty() {
        round += 1;
        let mut fresh: Vec<Triple> = Vec::new();
        let mut seen: HashSet<Triple> = HashSet::new();
        for rule in &rules.rules {
            for (i, pivot) in rule.body.iter().enumerate() {
                let rest: Vec<&TriplePattern> = rule
                    .body
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, a)| a)
                    .collect();
                for b in join(&delta, &[pivot], Binding::new())? {
                    for full in join(store, &rest, b)? {
                        for head in &rule.head {
                            if let Some(t) = instantiate(head, &full) {
                                if !seen.contains(&t) && !store.contains(&t)? {
                                    seen.insert(t.clone());
                                    fresh.push(t);
                                }
                            }
                        }
                    }
                }
            }
        }
        if sat.derived.len() + fresh.len() > limit {
            return Err(ReasonError::ResourceLimit { limit });
        }
        for t in &fresh {
            store.insert(t.clone())?;
            sat.rounds.insert(t.clone(), round);
            sat.derived.insert(t.clone());
        }
        if !fresh.is_empty() {
            sat.last_round = round;
        }
        delta = TripleStore::from_triples(fresh);
    }
    Ok(sat)
}

/// One rule application producing `conclusion` from `premises`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct DerivationTrace {
    pub conclusion: Triple,
    pub rule: String,
    pub premises: Vec<Triple>,
}

/// Every well-founded single-step derivation of `t`: rule instances whose
/// head yields `t` and whose premises are asserted or were derived in an
/// earlier round than `t`. Empty for asserted statements.
pub fn explain<G: Graph + ?Sized>(
    store: &G,
    rules: &RuleSet,
    sat: &Saturation,
    t: &Triple,
) -> Result<Vec<DerivationTrace>, ReasonError> {
    if !store.contains(t)? {
        return Err(ReasonError::NotFound(t.to_ntriples()));
    }
    let Some(round) = sat.round(t) else {
        return Ok(Vec::new());
    };
    let mut traces = Vec::new();
    for rule in &rules.rules {
        for head in &rule.head {
            let Some(seed) = unify(head, t, &Binding::new()) else {
                continue;
            };
            let body: Vec<&TriplePattern> = rule.body.iter().collect();
            for full in join(store, &body, seed)? {
                let premises: Option<Vec<Triple>> = rule.body.iter().map(|a| instantiate(a, &full)).collect();
                let Some(premises) = premises else { continue };
                if premises.iter().all(|p| sat.round(p).is_none_or(|r| r < round)) {
                    let trace = DerivationTrace {
                        conclusion: t.clone(),
                        rule: rule.name.clone(),
                        premises,
                    };
                    if !traces.contains(&trace) {
                        traces.push(trace);
                    }
                }
            }
        }
    }
    Ok(traces)
}

/// A derivation tree: leaves are asserted statements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Proof {
    pub triple: Triple,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub premises: Vec<Proof>,
}

impl Proof {
    /// Asserted statements at the leaves, in tree order.
    pub fn leaves(&self) -> Vec<&Triple> {
        if self.premises.is_empty() {
            return vec![&self.triple];
        }
        self.premises.iter().flat_map(Proof::leaves).collect()
    }

    pub fn depth(&self) -> usize {
        1 + self.premises.iter().map(Proof::depth).max().unwrap_or(0)
    }
}

/// Expands `t` into a full derivation tree, following the first trace of
/// every derived statement. Rounds strictly decrease along every branch.
pub fn prove<G: Graph + ?Sized>(store: &G, rules: &RuleSet, sat: &Saturation, t: &Triple) -> Result<Proof, ReasonError> {
    let traces = explain(store, rules, sat, t)?;
    let Some(trace) = traces.into_iter().next() else {
        return Ok(Proof {
            triple: t.clone(),
            rule: None,
            premises: Vec::new(),
        });
    };
    let premises = trace
        .premises
        .iter()
        .map(|p| prove(store, rules, sat, p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Proof {
        triple: t.clone(),
        rule: Some(trace.rule),
        premises,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PREFIX: &str = "@prefix : <http://obama.kb/onto#> .\n@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n";

    fn iri(local: &str) -> Term {
        Term::iri(format!("http://obama.kb/onto#{local}")).unwrap()
    }

    fn t(s: &str, p: &str, o: &str) -> Triple {
        Triple::new(iri(s), iri(p), iri(o)).unwrap()
    }

    #[test]
    fn parses_inverse_rule() {
        let rules = parse_rules(&format!("{PREFIX}RULE inv: IF (?x :achieve ?y) THEN (?y :achievedBy ?x)")).unwrap();
        assert_eq!(rules.len(), 1);
        let rule = &rules.rules()[0];
        assert_eq!(rule.name(), "inv");
        assert_eq!(rule.body().len(), 1);
        assert_eq!(rule.head().len(), 1);
        assert_eq!(rule.head()[0].predicate, iri("achievedBy"));
    }

    #[test]
    fn rejects_unsafe_rule() {
        let err = parse_rules(&format!("{PREFIX}RULE bad: IF (?x :p ?y) THEN (?x :q ?z)")).unwrap_err();
        assert_eq!(
            err,
            RuleError::UnsafeRule {
                rule: "bad".into(),
                variable: "z".into()
            }
        );
    }

    #[test]
    fn empty_file() {
        assert!(parse_rules("").unwrap().is_empty());
        assert!(parse_rules("# only a comment\n").unwrap().is_empty());
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let err = parse_rules(&format!("{PREFIX}\nRULE r: IF (?x :p ?y THEN (?y :p ?x)")).unwrap_err();
        assert!(matches!(err, RuleError::Syntax { line: 4, .. }), "{err:?}");
        let err = parse_rules("RULE r: IF (?x :p ?y) THEN (?y :p ?x)").unwrap_err();
        assert!(matches!(err, RuleError::UnknownPrefix { .. }));
        let err = parse_rules(&format!("{PREFIX}RULE r: IF (?x :p ?y) THEN (?y :p ?x)\nRULE r: IF (?x :p ?y) THEN (?y :q ?x)"))
            .unwrap_err();
        assert_eq!(err, RuleError::DuplicateRule("r".into()));
    }

    #[test]
    fn multi_atom_rules_and_full_iris() {
        let rules = parse_rules(
            "rule r: if (?t <http://x/d> ?g) and (?p <http://x/a> ?g) then (?p <http://x/r> ?t) and (?t <http://x/r2> ?p)",
        )
        .unwrap();
        let r = &rules.rules()[0];
        assert_eq!(r.body().len(), 2);
        assert_eq!(r.head().len(), 2);
    }

    #[test]
    fn empty_ruleset_derives_nothing() {
        let mut store = TripleStore::from_triples([t("a", "b", "c")]);
        let sat = saturate(&mut store, &RuleSet::default()).unwrap();
        assert!(sat.derived().is_empty());
    }

    #[test]
    fn inverse_derivation_and_trace() {
        let rules = parse_rules(&format!("{PREFIX}RULE inv: IF (?x :achieve ?y) THEN (?y :achievedBy ?x)")).unwrap();
        let asserted = t("DailyMeetings", "achieve", "Communication_Goal");
        let mut store = TripleStore::from_triples([asserted.clone()]);
        let sat = saturate(&mut store, &rules).unwrap();
        let expected = t("Communication_Goal", "achievedBy", "DailyMeetings");
        assert_eq!(sat.derived().iter().cloned().collect::<Vec<_>>(), vec![expected.clone()]);

        assert!(explain(&store, &rules, &sat, &asserted).unwrap().is_empty());
        let traces = explain(&store, &rules, &sat, &expected).unwrap();
        assert_eq!(
            traces,
            vec![DerivationTrace {
                conclusion: expected.clone(),
                rule: "inv".into(),
                premises: vec![asserted.clone()],
            }]
        );
        let missing = t("x", "y", "z");
        assert!(matches!(explain(&store, &rules, &sat, &missing), Err(ReasonError::NotFound(_))));
    }

    #[test]
    fn second_saturation_is_empty() {
        let rules = parse_rules(&format!(
            "{PREFIX}RULE trans: IF (?a rdfs:subClassOf ?b) AND (?b rdfs:subClassOf ?c) THEN (?a rdfs:subClassOf ?c)"
        ))
        .unwrap();
        let sub = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
        let chain: Vec<Triple> = ["A", "B", "C", "D", "E"]
            .windows(2)
            .map(|w| Triple::new(iri(w[0]), Term::iri(sub).unwrap(), iri(w[1])).unwrap())
            .collect();
        let mut store = TripleStore::from_triples(chain);
        let first = saturate(&mut store, &rules).unwrap();
        // 5 nodes in a chain: C(5,2) = 10 pairs, 4 asserted.
        assert_eq!(first.derived().len(), 6);
        assert!(saturate(&mut store, &rules).unwrap().derived().is_empty());
    }

    #[test]
    fn resource_limit() {
        let rules = parse_rules(&format!(
            "{PREFIX}RULE trans: IF (?a :r ?b) AND (?b :r ?c) THEN (?a :r ?c)"
        ))
        .unwrap();
        let names: Vec<String> = (0..30).map(|i| format!("n{i}")).collect();
        let chain = names.windows(2).map(|w| t(&w[0], "r", &w[1]));
        let mut store = TripleStore::from_triples(chain);
        let initial = store.triples().unwrap();
        let err = saturate_with(&mut store, &rules, initial, None, 50).unwrap_err();
        assert_eq!(err, ReasonError::ResourceLimit { limit: 50 });
    }

    #[test]
    fn literal_bindings_never_reach_subject_position() {
        let rules = parse_rules(&format!("{PREFIX}RULE flip: IF (?x :name ?n) THEN (?n :nameOf ?x)")).unwrap();
        let mut store = TripleStore::from_triples([Triple::new(iri("a"), iri("name"), Term::literal("A")).unwrap()]);
        assert!(saturate(&mut store, &rules).unwrap().derived().is_empty());
    }

    #[test]
    fn layered_rounds_continue() {
        let rules = parse_rules(&format!("{PREFIX}RULE inv: IF (?x :p ?y) THEN (?y :q ?x)")).unwrap();
        let mut store = TripleStore::from_triples([t("a", "p", "b")]);
        let base = Arc::new(saturate(&mut store, &rules).unwrap());
        assert_eq!(base.last_round(), 1);
        let extra = t("c", "p", "d");
        store.insert(extra.clone());
        let top = saturate_with(&mut store, &rules, [extra], Some(base.clone()), 10).unwrap();
        assert_eq!(top.derived().len(), 1);
        assert_eq!(top.round(&t("d", "q", "c")), Some(2));
        assert_eq!(top.round(&t("b", "q", "a")), Some(1));
    }
}
