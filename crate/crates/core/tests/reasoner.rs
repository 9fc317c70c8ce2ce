use std::collections::BTreeSet;
use std::sync::Arc;

use agilekb_core::rules::{
    explain, parse_rules, prove, saturate, saturate_with, ReasonError, RuleError, RuleSet, Saturation,
    DEFAULT_DERIVATION_LIMIT,
};
use agilekb_core::store::{Graph, GraphMut};
use agilekb_core::{SharedStore, Term, Triple, TripleStore};
use agilekb_testkit::graph::{random_triples, Vocab};
use agilekb_testkit::reasoner::{naive_closure, random_rules, render_rules};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

const PREFIXES: &str = "@prefix : <http://obama.kb/onto#> .\n\
@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .\n\
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n";

fn o(local: &str) -> Term {
    Term::iri(format!("http://obama.kb/onto#{local}")).unwrap()
}

fn rdf_type() -> Term {
    Term::iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type").unwrap()
}

fn sub_class() -> Term {
    Term::iri("http://www.w3.org/2000/01/rdf-schema#subClassOf").unwrap()
}

fn t(s: Term, p: Term, obj: Term) -> Triple {
    Triple::new(s, p, obj).unwrap()
}

fn rules(body: &str) -> RuleSet {
    parse_rules(&format!("{PREFIXES}{body}")).unwrap()
}

#[test]
fn parse_examples() {
    let set = rules("RULE inv: IF (?x :achieve ?y) THEN (?y :achievedBy ?x)");
    assert_eq!(set.len(), 1);
    let inv = set.get("inv").unwrap();
    assert_eq!((inv.body().len(), inv.head().len()), (1, 1));
    let bad = parse_rules(&format!("{PREFIXES}RULE bad: IF (?x :p ?y) THEN (?x :q ?z)"));
    assert!(matches!(bad, Err(RuleError::UnsafeRule { variable, .. }) if variable == "z"));
    assert!(parse_rules("").unwrap().is_empty());
}

#[test]
fn saturate_examples() {
    let mut store = TripleStore::from_triples([t(o("DailyMeetings"), o("achieve"), o("Communication_Goal"))]);
    assert!(saturate(&mut store, &RuleSet::default()).unwrap().derived().is_empty());

    let set = rules("RULE inv: IF (?x :achieve ?y) THEN (?y :achievedBy ?x)");
    let sat = saturate(&mut store, &set).unwrap();
    let expected = t(o("Communication_Goal"), o("achievedBy"), o("DailyMeetings"));
    assert_eq!(sat.derived(), &BTreeSet::from([expected.clone()]));

    let traces = explain(&store, &set, &sat, &expected).unwrap();
    assert_eq!(traces.len(), 1);
    assert_eq!(traces[0].rule, "inv");
    assert_eq!(traces[0].premises, [t(o("DailyMeetings"), o("achieve"), o("Communication_Goal"))]);
    let asserted = t(o("DailyMeetings"), o("achieve"), o("Communication_Goal"));
    assert!(explain(&store, &set, &sat, &asserted).unwrap().is_empty());
    let absent = t(o("Nope"), o("achieve"), o("Nothing"));
    assert!(matches!(explain(&store, &set, &sat, &absent), Err(ReasonError::NotFound(_))));
}

#[test]
fn subclass_chain_lifts_memberships() {
    let set = rules(
        "RULE lift: IF (?x rdf:type ?c) AND (?c rdfs:subClassOf ?d) THEN (?x rdf:type ?d)\n\
         RULE trans: IF (?a rdfs:subClassOf ?b) AND (?b rdfs:subClassOf ?c) THEN (?a rdfs:subClassOf ?c)",
    );
    let base = [
        t(o("Communication"), sub_class(), o("Situation")),
        t(o("Situation"), sub_class(), o("Thing")),
        t(o("Verbal"), rdf_type(), o("Communication")),
    ];
    let mut store = TripleStore::from_triples(base.clone());
    let sat = saturate(&mut store, &set).unwrap();
    let expected = BTreeSet::from([
        t(o("Communication"), sub_class(), o("Thing")),
        t(o("Verbal"), rdf_type(), o("Situation")),
        t(o("Verbal"), rdf_type(), o("Thing")),
    ]);
    assert_eq!(sat.derived(), &expected);
    let oracle = naive_rules_closure(&base, &set);
    assert_eq!(store.iter().collect::<BTreeSet<_>>(), oracle);
}

/// The same closure computed by the oracle from the rule text.
fn naive_rules_closure(base: &[Triple], set: &RuleSet) -> BTreeSet<Triple> {
    use agilekb_testkit::reasoner::RuleSpec;
    use agilekb_testkit::sparql::Slot;
    let slot = |term: &Term| {
        if term.is_variable() {
            Slot::Var(term.text().to_owned())
        } else {
            Slot::Term(term.clone())
        }
    };
    let specs: Vec<RuleSpec> = set
        .rules()
        .iter()
        .map(|r| RuleSpec {
            name: r.name().to_owned(),
            body: r.body().iter().map(|a| a.positions().map(slot)).collect(),
            head: r.head().iter().map(|a| a.positions().map(slot)).collect(),
        })
        .collect();
    naive_closure(base, &specs)
}

#[test]
fn two_step_derivation_has_derived_premise() {
    let set = rules(
        "RULE lift: IF (?x rdf:type ?c) AND (?c rdfs:subClassOf ?d) THEN (?x rdf:type ?d)\n\
         RULE recommend: IF (?t :desiresGoal ?g) AND (?p :achieve ?g) AND (?p rdf:type :Practice) THEN (?p :recommendedFor ?t)",
    );
    let mut store = TripleStore::from_triples([
        t(o("Scrum"), rdf_type(), o("FrameworkPractice")),
        t(o("FrameworkPractice"), sub_class(), o("Practice")),
        t(o("Scrum"), o("achieve"), o("Communication_Goal")),
        t(o("Team"), o("desiresGoal"), o("Communication_Goal")),
    ]);
    let sat = saturate(&mut store, &set).unwrap();
    let edge = t(o("Scrum"), o("recommendedFor"), o("Team"));
    let traces = explain(&store, &set, &sat, &edge).unwrap();
    assert_eq!(traces.len(), 1);
    let lifted = t(o("Scrum"), rdf_type(), o("Practice"));
    assert!(traces[0].premises.contains(&lifted));
    assert!(sat.is_derived(&lifted));
    let proof = prove(&store, &set, &sat, &edge).unwrap();
    assert_eq!(proof.depth(), 3);
    assert_eq!(proof.leaves().len(), 4);
}

#[test]
fn resource_limit() {
    let set = rules("RULE grow: IF (?x :next ?y) THEN (?y :next ?x) AND (?x :seen ?y)");
    let mut store = TripleStore::from_triples((0..50).map(|i| t(o(&format!("n{i}")), o("next"), o(&format!("n{}", i + 1)))));
    let all: Vec<Triple> = store.iter().collect();
    let err = saturate_with(&mut store, &set, all, None, 10).unwrap_err();
    assert_eq!(err, ReasonError::ResourceLimit { limit: 10 });
}

#[test]
fn layered_saturation_on_overlay() {
    let set = rules(
        "RULE inv: IF (?x :achieve ?y) THEN (?y :achievedBy ?x)\n\
         RULE rec: IF (?t :desiresGoal ?g) AND (?p :achieve ?g) THEN (?p :recommendedFor ?t)",
    );
    let mut base = TripleStore::from_triples([t(o("P"), o("achieve"), o("G"))]);
    let base_sat = Arc::new(saturate(&mut base, &set).unwrap());
    let shared = SharedStore::new(base);
    let mut overlay = shared.overlay();
    let added = vec![t(o("T"), o("desiresGoal"), o("G"))];
    for a in &added {
        overlay.insert(a.clone()).unwrap();
    }
    let sat = saturate_with(&mut overlay, &set, added.clone(), Some(base_sat), DEFAULT_DERIVATION_LIMIT).unwrap();
    assert_eq!(sat.derived(), &BTreeSet::from([t(o("P"), o("recommendedFor"), o("T"))]));
    let all: Vec<Triple> = shared.read().iter().chain(added).collect();
    let full = naive_rules_closure(&all, &set);
    assert_eq!(overlay.triples().unwrap().into_iter().collect::<BTreeSet<_>>(), full);
    assert_eq!(shared.read().len(), 2);
}

/// Every derived statement has a trace; every proof bottoms out in asserted
/// statements and decreases in round along each branch.
fn check_traces(store: &TripleStore, set: &RuleSet, sat: &Saturation, asserted: &BTreeSet<Triple>) -> Result<(), TestCaseError> {
    for d in sat.derived() {
        let traces = explain(store, set, sat, d).unwrap();
        prop_assert!(!traces.is_empty(), "no trace for {}", d);
        for tr in &traces {
            prop_assert!(tr.premises.iter().all(|p| store.contains(p)));
        }
        let proof = prove(store, set, sat, d).unwrap();
        prop_assert!(proof.leaves().iter().all(|l| asserted.contains(l)));
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn semi_naive_matches_naive(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let vocab = Vocab::random(&mut rng, 10, 4);
        let base = random_triples(&mut rng, &vocab, 300);
        let specs = random_rules(&mut rng, &vocab, 10);
        let set = parse_rules(&render_rules(&specs)).unwrap();
        let mut store = TripleStore::from_triples(base.iter().cloned());
        let sat = saturate(&mut store, &set).unwrap();
        let closure: BTreeSet<Triple> = store.iter().collect();
        prop_assert_eq!(&closure, &naive_closure(&base, &specs));
        let asserted: BTreeSet<Triple> = base.iter().cloned().collect();
        prop_assert_eq!(sat.derived().len(), closure.len() - asserted.len());

        // fixpoint
        prop_assert!(saturate(&mut store, &set).unwrap().derived().is_empty());

        // rule order does not matter
        let mut shuffled = specs.clone();
        shuffled.shuffle(&mut rng);
        let reordered = parse_rules(&render_rules(&shuffled)).unwrap();
        let mut other = TripleStore::from_triples(base.iter().cloned());
        saturate(&mut other, &reordered).unwrap();
        prop_assert_eq!(other.iter().collect::<BTreeSet<_>>(), closure.clone());

        check_traces(&store, &set, &sat, &asserted)?;
    }

    #[test]
    fn closure_is_monotone(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let vocab = Vocab::random(&mut rng, 8, 3);
        let big = random_triples(&mut rng, &vocab, 200);
        let small: Vec<Triple> = big.iter().filter(|_| rand::Rng::gen_bool(&mut rng, 0.5)).cloned().collect();
        let specs = random_rules(&mut rng, &vocab, 6);
        let set = parse_rules(&render_rules(&specs)).unwrap();
        let mut a = TripleStore::from_triples(small);
        let mut b = TripleStore::from_triples(big);
        saturate(&mut a, &set).unwrap();
        saturate(&mut b, &set).unwrap();
        let cb: BTreeSet<Triple> = b.iter().collect();
        prop_assert!(a.iter().all(|t| cb.contains(&t)));
    }
}
