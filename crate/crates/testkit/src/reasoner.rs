//! Random rule sets and the naive fixpoint: apply every rule to the whole
//! store, add what is new, repeat until nothing changes.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use agilekb_core::{Term, Triple};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{Vocab, NS};
use crate::sparql::Slot;

#[derive(Debug, Clone)]
pub struct RuleSpec {
    pub name: String,
    pub body: Vec<[Slot; 3]>,
    pub head: Vec<[Slot; 3]>,
}

const VARS: &[&str] = &["x", "y", "z", "w"];

/// Up to `max_rules` range-restricted rules. Heads may use the extra
/// predicates `q0`, `q1`, which bodies also read, so rules chain. Rule
/// constants are IRIs; literals reach rules only through variables.
pub fn random_rules(rng: &mut impl Rng, vocab: &Vocab, max_rules: usize) -> Vec<RuleSpec> {
    let mut preds = vocab.predicates.clone();
    preds.push(Term::iri(format!("{NS}q0")).unwrap());
    preds.push(Term::iri(format!("{NS}q1")).unwrap());
    let n = rng.gen_range(0..=max_rules);
    let mut rules = Vec::new();
    for i in 0..n {
        let body_len = *[1, 1, 2, 2, 2, 3].choose(rng).unwrap();
        let var = |rng: &mut dyn rand::RngCore| Slot::Var(VARS[rng.gen_range(0..VARS.len())].to_owned());
        let mut body = Vec::new();
        for _ in 0..body_len {
            let s = if rng.gen_bool(0.85) { var(rng) } else { Slot::Term(vocab.entity(rng)) };
            let p = if rng.gen_bool(0.1) { var(rng) } else { Slot::Term(preds.choose(rng).unwrap().clone()) };
            let o = if rng.gen_bool(0.8) { var(rng) } else { Slot::Term(vocab.entity(rng)) };
            body.push([s, p, o]);
        }
        let bound: Vec<Slot> = body
            .iter()
            .flat_map(|a| a.iter())
            .filter(|s| matches!(s, Slot::Var(_)))
            .cloned()
            .collect();
        let head_var_or = |rng: &mut dyn rand::RngCore, fallback: Term| {
            if !bound.is_empty() && rng.gen_bool(0.8) {
                bound[rng.gen_range(0..bound.len())].clone()
            } else {
                Slot::Term(fallback)
            }
        };
        let mut head = Vec::new();
        for _ in 0..rng.gen_range(1..=2) {
            let fallback = vocab.entity(rng);
            let s = head_var_or(rng, fallback);
            let p = if rng.gen_bool(0.05) && !bound.is_empty() {
                bound.choose(rng).unwrap().clone()
            } else {
                Slot::Term(preds.choose(rng).unwrap().clone())
            };
            let fallback = vocab.entity(rng);
            let o = head_var_or(rng, fallback);
            head.push([s, p, o]);
        }
        rules.push(RuleSpec {
            name: format!("r{i}"),
            body,
            head,
        });
    }
    rules
}

fn slot_text(s: &Slot) -> String {
    match s {
        Slot::Var(v) => format!("?{v}"),
        Slot::Term(Term::Iri(t)) => format!("<{t}>"),
        Slot::Term(Term::Literal { value, datatype: None }) => format!("\"{value}\""),
        Slot::Term(Term::Literal {
            value,
            datatype: Some(dt),
        }) => format!("\"{value}\"^^<{dt}>"),
        Slot::Term(Term::Variable(v)) => format!("?{v}"),
    }
}

/// Rule-file text for `rules`, in the given order.
pub fn render_rules(rules: &[RuleSpec]) -> String {
    let atom = |a: &[Slot; 3]| format!("({} {} {})", slot_text(&a[0]), slot_text(&a[1]), slot_text(&a[2]));
    let mut out = String::from("# generated\n");
    for r in rules {
        let body: Vec<String> = r.body.iter().map(atom).collect();
        let head: Vec<String> = r.head.iter().map(atom).collect();
        writeln!(out, "RULE {}: IF {} THEN {}", r.name, body.join(" AND "), head.join(" AND ")).unwrap();
    }
    out
}

type Binding = HashMap<String, Term>;

fn unify(atom: &[Slot; 3], fact: &Triple, b: &Binding) -> Option<Binding> {
    let mut out = b.clone();
    for (slot, term) in atom.iter().zip([fact.subject(), fact.predicate(), fact.object()]) {
        match slot {
            Slot::Term(t) => {
                if t != term {
                    return None;
                }
            }
            Slot::Var(v) => match out.get(v) {
                Some(bound) if bound != term => return None,
                Some(_) => {}
                None => {
                    out.insert(v.clone(), term.clone());
                }
            },
        }
    }
    Some(out)
}

fn resolve(slot: &Slot, b: &Binding) -> Term {
    match slot {
        Slot::Term(t) => t.clone(),
        Slot::Var(v) => b[v].clone(),
    }
}

/// Least fixpoint of `rules` over `triples`. Instantiations that would put
/// a literal in subject or predicate position produce nothing.
pub fn naive_closure(triples: &[Triple], rules: &[RuleSpec]) -> BTreeSet<Triple> {
    let mut facts: BTreeSet<Triple> = triples.iter().cloned().collect();
    loop {
        let all: Vec<&Triple> = facts.iter().collect();
        let mut by_pred: HashMap<&Term, Vec<&Triple>> = HashMap::new();
        for t in &all {
            by_pred.entry(t.predicate()).or_default().push(t);
        }
        let mut new = BTreeSet::new();
        for rule in rules {
            let mut bindings = vec![Binding::new()];
            for atom in &rule.body {
                let mut next = Vec::new();
                for b in &bindings {
                    let candidates: &[&Triple] = match &atom[1] {
                        Slot::Term(p) => by_pred.get(p).map(Vec::as_slice).unwrap_or_default(),
                        Slot::Var(v) => match b.get(v) {
                            Some(p) => by_pred.get(p).map(Vec::as_slice).unwrap_or_default(),
                            None => &all,
                        },
                    };
                    for fact in candidates {
                        if let Some(nb) = unify(atom, fact, b) {
                            next.push(nb);
                        }
                    }
                }
                bindings = next;
            }
            for b in &bindings {
                for h in &rule.head {
                    let (s, p, o) = (resolve(&h[0], b), resolve(&h[1], b), resolve(&h[2], b));
                    if s.is_iri() && p.is_iri() {
                        let t = Triple::new(s, p, o).unwrap();
                        if !facts.contains(&t) {
                            new.insert(t);
                        }
                    }
                }
            }
        }
        if new.is_empty() {
            return facts;
        }
        facts.extend(new);
    }
}
