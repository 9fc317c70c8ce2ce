//! Random vocabularies, stores and Turtle documents.

use std::collections::BTreeSet;
use std::fmt::Write;

use agilekb_core::term::vocab;
use agilekb_core::{Term, Triple};
use rand::seq::SliceRandom;
use rand::Rng;

pub const NS: &str = "http://example.org/g/";

const WORDS: &[&str] = &["alpha", "beta", "gamma", "delta", "alphabet", "betamax", "omega"];

/// A small closed set of terms to draw statements from.
#[derive(Debug, Clone)]
pub struct Vocab {
    pub entities: Vec<Term>,
    pub predicates: Vec<Term>,
    pub literals: Vec<Term>,
}

impl Vocab {
    pub fn new(entities: usize, predicates: usize, literals: usize) -> Vocab {
        let mut lits: Vec<Term> = WORDS.iter().take(literals).map(Term::literal).collect();
        if literals > WORDS.len() {
            lits.push(Term::typed_literal("alpha", "http://www.w3.org/2001/XMLSchema#token").unwrap());
        }
        Vocab {
            entities: (0..entities).map(|i| Term::iri(format!("{NS}e{i}")).unwrap()).collect(),
            predicates: (0..predicates).map(|i| Term::iri(format!("{NS}p{i}")).unwrap()).collect(),
            literals: lits,
        }
    }

    pub fn random(rng: &mut impl Rng, max_entities: usize, max_predicates: usize) -> Vocab {
        Vocab::new(
            rng.gen_range(2..=max_entities),
            rng.gen_range(1..=max_predicates),
            rng.gen_range(0..=WORDS.len() + 1),
        )
    }

    pub fn entity(&self, rng: &mut impl Rng) -> Term {
        self.entities.choose(rng).unwrap().clone()
    }

    pub fn predicate(&self, rng: &mut impl Rng) -> Term {
        self.predicates.choose(rng).unwrap().clone()
    }

    /// An entity or, when the vocabulary has any, sometimes a literal.
    pub fn object(&self, rng: &mut impl Rng) -> Term {
        if !self.literals.is_empty() && rng.gen_bool(0.3) {
            self.literals.choose(rng).unwrap().clone()
        } else {
            self.entity(rng)
        }
    }
}

/// Up to `max` distinct statements over `vocab`, in random order.
pub fn random_triples(rng: &mut impl Rng, vocab: &Vocab, max: usize) -> Vec<Triple> {
    let n = rng.gen_range(0..=max);
    let mut set = BTreeSet::new();
    for _ in 0..n {
        set.insert(Triple::new(vocab.entity(rng), vocab.predicate(rng), vocab.object(rng)).unwrap());
    }
    let mut out: Vec<Triple> = set.into_iter().collect();
    out.shuffle(rng);
    out
}

/// Every distinct term occurring in `triples`.
pub fn terms_of(triples: &[Triple]) -> Vec<Term> {
    let mut set = BTreeSet::new();
    for t in triples {
        set.insert(t.subject().clone());
        set.insert(t.predicate().clone());
        set.insert(t.object().clone());
    }
    set.into_iter().collect()
}

const NAMESPACES: &[&str] = &["http://example.org/a#", "http://example.org/b/", "urn:x:"];
const LABELS: &[&str] = &["", "ex", "b", "n1", "zz"];
const TRICKY: &[&str] = &[
    "plain",
    "with \"quotes\"",
    "back\\slash",
    "line\nbreak",
    "tab\there",
    "caf\u{e9} \u{2713}",
    "",
    "# not a comment",
    "a . b ; c , d",
];

fn escape(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

/// A random Turtle document written in varied surface forms, together with
/// the statements it denotes. Labels are bound to namespaces at random.
pub fn random_document(rng: &mut impl Rng, max_triples: usize) -> (String, BTreeSet<Triple>) {
    let mut labels: Vec<&str> = LABELS.to_vec();
    labels.shuffle(rng);
    let bindings: Vec<(&str, &str)> = labels.iter().copied().zip(NAMESPACES.iter().copied()).collect();

    let iri = |rng: &mut dyn rand::RngCore| -> Term {
        let ns = NAMESPACES[rng.gen_range(0..NAMESPACES.len())];
        Term::iri(format!("{ns}n{}", rng.gen_range(0..6))).unwrap()
    };
    let n = rng.gen_range(0..=max_triples);
    let mut triples = BTreeSet::new();
    for _ in 0..n {
        let s = iri(rng);
        let p = if rng.gen_bool(0.2) {
            Term::iri(vocab::RDF_TYPE).unwrap()
        } else {
            iri(rng)
        };
        let o = match rng.gen_range(0..10) {
            0..=4 => iri(rng),
            5..=8 => Term::literal(TRICKY[rng.gen_range(0..TRICKY.len())]),
            _ => Term::typed_literal(TRICKY[rng.gen_range(0..3)], "http://www.w3.org/2001/XMLSchema#string").unwrap(),
        };
        triples.insert(Triple::new(s, p, o).unwrap());
    }

    let render = |rng: &mut dyn rand::RngCore, t: &Term, predicate: bool| -> String {
        if predicate && t.text() == vocab::RDF_TYPE && rng.gen_bool(0.7) {
            return "a".into();
        }
        match t {
            Term::Iri(text) => {
                if rng.gen_bool(0.6) {
                    if let Some((label, ns)) = bindings.iter().find(|(_, ns)| text.starts_with(*ns)) {
                        return format!("{label}:{}", &text[ns.len()..]);
                    }
                }
                format!("<{text}>")
            }
            Term::Literal { value, datatype } => match datatype {
                Some(dt) => format!("\"{}\"^^<{dt}>", escape(value)),
                None => format!("\"{}\"", escape(value)),
            },
            Term::Variable(_) => unreachable!(),
        }
    };

    let mut text = String::new();
    if rng.gen_bool(0.3) {
        text.push_str("# generated document\n");
    }
    for (label, ns) in &bindings {
        writeln!(text, "@prefix {label}: <{ns}> .").unwrap();
    }
    let mut subjects: Vec<Term> = triples.iter().map(|t| t.subject().clone()).collect::<BTreeSet<_>>().into_iter().collect();
    subjects.shuffle(rng);
    for s in subjects {
        let mut group: Vec<&Triple> = triples.iter().filter(|t| *t.subject() == s).collect();
        group.shuffle(rng);
        if rng.gen_bool(0.5) {
            // one statement per line
            for t in group {
                let line = format!(
                    "{} {} {} .",
                    render(rng, t.subject(), false),
                    render(rng, t.predicate(), true),
                    render(rng, t.object(), false)
                );
                writeln!(text, "{line}").unwrap();
            }
        } else {
            group.sort_by(|a, b| a.predicate().cmp(b.predicate()));
            let mut out = render(rng, &s, false);
            let mut last: Option<&Term> = None;
            for (i, t) in group.iter().enumerate() {
                if last == Some(t.predicate()) {
                    out.push_str(" ,\n        ");
                } else {
                    if i > 0 {
                        out.push_str(" ;\n    ");
                    } else {
                        out.push(' ');
                    }
                    out.push_str(&render(rng, t.predicate(), true));
                    out.push(' ');
                }
                out.push_str(&render(rng, t.object(), false));
                last = Some(t.predicate());
            }
            writeln!(text, "{out} .").unwrap();
        }
        if rng.gen_bool(0.2) {
            text.push_str("\n  # comment line\n");
        }
    }
    (text, triples)
}
