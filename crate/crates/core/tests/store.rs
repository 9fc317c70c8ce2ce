use std::collections::BTreeSet;

use agilekb_core::store::{Graph, GraphMut};
use agilekb_core::term::TermKind;
use agilekb_core::{Interner, SharedStore, StoreError, Term, TermError, Triple, TriplePattern, TripleStore};
use agilekb_testkit::graph::{random_triples, Vocab};
use agilekb_testkit::order_key;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

const ONTO: &str = "http://obama.kb/onto#";
const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

fn iri(local: &str) -> Term {
    Term::iri(format!("{ONTO}{local}")).unwrap()
}

fn triple(s: &str, p: &str, o: &str) -> Triple {
    Triple::new(iri(s), iri(p), iri(o)).unwrap()
}

fn var(name: &str) -> Term {
    Term::variable(name).unwrap()
}

fn seed_store() -> TripleStore {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/seed.ttl")).unwrap();
    TripleStore::from_triples(agilekb_core::turtle::parse_turtle(&text).unwrap().triples)
}

#[test]
fn intern_examples() {
    let mut interner = Interner::new();
    let practice = interner.intern(TermKind::Iri, &format!("{ONTO}Practice"), None).unwrap();
    assert_eq!(practice, iri("Practice"));
    assert_eq!(interner.intern(TermKind::Iri, &format!("{ONTO}Practice"), None).unwrap(), practice);
    let lit = interner.intern(TermKind::Literal, "Daily meetings", None).unwrap();
    assert!(lit.is_literal() && lit.datatype().is_none());
    assert!(matches!(
        interner.intern(TermKind::Iri, "has space", None),
        Err(TermError::Whitespace(_))
    ));
}

#[test]
fn insert_examples() {
    let mut store = TripleStore::new();
    let t = Triple::new(iri("Team42_SprintReview"), Term::iri(RDF_TYPE).unwrap(), iri("Practice")).unwrap();
    assert!(store.insert(t.clone()));
    assert_eq!(store.len(), 1);
    assert!(!store.insert(t.clone()));
    assert!(store.remove(&t));
    assert!(store.matches(&t.to_pattern()).is_empty());
}

#[test]
fn match_examples() {
    assert!(TripleStore::new()
        .matches(&TriplePattern::new(var("s"), var("p"), var("o")))
        .is_empty());
    let seed = seed_store();
    let practices = seed.matches(&TriplePattern::new(var("s"), Term::iri(RDF_TYPE).unwrap(), iri("Practice")));
    let subjects: Vec<&Term> = practices.iter().map(Triple::subject).collect();
    assert_eq!(subjects, [&iri("DailyMeetings"), &iri("Team42_SprintReview")]);
}

#[test]
fn overlay_examples() {
    let base = SharedStore::new(TripleStore::from_triples([
        triple("a", "p", "b"),
        triple("b", "p", "c"),
        triple("c", "p", "d"),
    ]));
    let all = TriplePattern::new(var("s"), var("p"), var("o"));
    let mut overlay = base.overlay();
    assert_eq!(overlay.match_pattern(&all).unwrap().len(), 3);
    overlay.insert(triple("d", "p", "e")).unwrap();
    assert_eq!(overlay.match_pattern(&all).unwrap().len(), 4);
    overlay.insert(triple("team", "desiresGoal", "g")).unwrap();
    drop(overlay);
    assert_eq!(base.read().len(), 3);

    let overlay = base.overlay();
    base.write().insert(triple("x", "p", "y"));
    assert!(matches!(overlay.match_pattern(&all), Err(StoreError::StaleOverlay { .. })));
}

#[derive(Debug, Clone)]
enum Op {
    Insert(usize, usize, usize),
    Remove(usize, usize, usize),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0..6usize, 0..3usize, 0..6usize).prop_map(|(s, p, o)| Op::Insert(s, p, o)),
        (0..6usize, 0..3usize, 0..6usize).prop_map(|(s, p, o)| Op::Remove(s, p, o)),
    ]
}

fn op_triple(s: usize, p: usize, o: usize) -> Triple {
    let obj = if o == 5 {
        Term::literal("five")
    } else {
        iri(&format!("e{o}"))
    };
    Triple::new(iri(&format!("e{s}")), iri(&format!("p{p}")), obj).unwrap()
}

/// Every pattern shape over `t`'s positions: each position either bound to
/// `t`'s term or a variable.
fn patterns_for(t: &Triple) -> Vec<TriplePattern> {
    let mut out = Vec::new();
    for mask in 0..8u8 {
        let pick = |bit: u8, term: &Term, name: &str| if mask & bit != 0 { term.clone() } else { var(name) };
        out.push(TriplePattern::new(
            pick(1, t.subject(), "s"),
            pick(2, t.predicate(), "p"),
            pick(4, t.object(), "o"),
        ));
    }
    out
}

fn scan(all: &[Triple], p: &TriplePattern) -> Vec<Triple> {
    let fits = |pat: &Term, t: &Term| pat.is_variable() || pat == t;
    let mut out: Vec<Triple> = all
        .iter()
        .filter(|t| fits(&p.subject, t.subject()) && fits(&p.predicate, t.predicate()) && fits(&p.object, t.object()))
        .cloned()
        .collect();
    out.sort_by_key(|t| (order_key(t.subject()), order_key(t.predicate()), order_key(t.object())));
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn indexes_stay_coherent(ops in prop::collection::vec(op(), 0..80)) {
        let mut store = TripleStore::new();
        let mut model = BTreeSet::new();
        for op in ops {
            let before = store.generation();
            let changed = match op {
                Op::Insert(s, p, o) => {
                    let t = op_triple(s, p, o);
                    let fresh = model.insert(t.clone());
                    prop_assert_eq!(store.insert(t), fresh);
                    fresh
                }
                Op::Remove(s, p, o) => {
                    let t = op_triple(s, p, o);
                    let present = model.remove(&t);
                    prop_assert_eq!(store.remove(&t), present);
                    present
                }
            };
            prop_assert_eq!(store.generation() > before, changed);
            prop_assert_eq!(store.generation() == before, !changed);
        }
        let spo = store.enumerate_index(0);
        prop_assert_eq!(&spo, &model);
        prop_assert_eq!(&store.enumerate_index(1), &model);
        prop_assert_eq!(&store.enumerate_index(2), &model);
        prop_assert_eq!(store.len(), model.len());
    }

    #[test]
    fn insert_then_remove_restores(ops in prop::collection::vec(op(), 0..30), s in 0..6usize, p in 0..3usize, o in 0..6usize) {
        let mut store = TripleStore::new();
        for op in ops {
            if let Op::Insert(s, p, o) = op { store.insert(op_triple(s, p, o)); }
        }
        let before: BTreeSet<Triple> = store.iter().collect();
        let generation = store.generation();
        let t = op_triple(s, p, o);
        if store.contains(&t) {
            store.remove(&t);
            store.insert(t);
        } else {
            store.insert(t.clone());
            store.remove(&t);
        }
        prop_assert_eq!(store.iter().collect::<BTreeSet<_>>(), before);
        prop_assert!(store.generation() > generation);
    }

    #[test]
    fn match_equals_scan(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let vocab = Vocab::random(&mut rng, 14, 6);
        let triples = random_triples(&mut rng, &vocab, 1000);
        let store = TripleStore::from_triples(triples.iter().cloned());
        let mut probes: Vec<Triple> = triples.iter().take(5).cloned().collect();
        probes.push(Triple::new(vocab.entity(&mut rng), vocab.predicate(&mut rng), vocab.object(&mut rng)).unwrap());
        for probe in &probes {
            for pattern in patterns_for(probe) {
                let got = store.matches(&pattern);
                prop_assert_eq!(&got, &scan(&triples, &pattern));
                prop_assert_eq!(&got, &store.matches(&pattern));
            }
        }
    }

    #[test]
    fn overlay_isolation(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let vocab = Vocab::random(&mut rng, 8, 3);
        let base_triples = random_triples(&mut rng, &vocab, 100);
        let base = SharedStore::new(TripleStore::from_triples(base_triples.iter().cloned()));
        let before: BTreeSet<Triple> = base.read().iter().collect();
        let generation = base.read().generation();
        let mut overlay = base.overlay();
        let extra = random_triples(&mut rng, &vocab, 60);
        for t in &extra {
            overlay.insert(t.clone()).unwrap();
        }
        let union: BTreeSet<Triple> = before.iter().chain(extra.iter()).cloned().collect();
        let seen: BTreeSet<Triple> = overlay.triples().unwrap().into_iter().collect();
        prop_assert_eq!(&seen, &union);
        prop_assert!(overlay.added().iter().all(|t| !before.contains(&t)));
        let probe = TriplePattern::new(var("s"), vocab.predicate(&mut rng), var("o"));
        prop_assert_eq!(overlay.match_pattern(&probe).unwrap(), scan(&union.iter().cloned().collect::<Vec<_>>(), &probe));
        drop(overlay);
        prop_assert_eq!(base.read().iter().collect::<BTreeSet<_>>(), before);
        prop_assert_eq!(base.read().generation(), generation);
    }
}
