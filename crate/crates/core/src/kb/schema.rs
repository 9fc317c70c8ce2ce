//! Ontology schema: classes, object properties and data properties, read
//! from `owl:Class`, `owl:ObjectProperty` and `owl:DatatypeProperty`
//! declarations, and the domain/range check run after loading.
//!
//! A property with several domains (or ranges) accepts any one of them:
//! `rdfs:domain :Team , :Practice` means "a Team or a Practice".

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::store::TripleStore;
use crate::term::{vocab, Term, Triple, TriplePattern};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDef {
    pub iri: Term,
    pub parents: BTreeSet<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectPropertyDef {
    pub iri: Term,
    pub domains: BTreeSet<Term>,
    pub ranges: BTreeSet<Term>,
    pub inverse: Option<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataPropertyDef {
    pub iri: Term,
    pub domains: BTreeSet<Term>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SchemaDef {
    pub classes: BTreeMap<Term, ClassDef>,
    pub object_properties: BTreeMap<Term, ObjectPropertyDef>,
    pub data_properties: BTreeMap<Term, DataPropertyDef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemaProblem {
    /// A subClassOf cycle, listed from its first class back to it.
    Cycle(Vec<Term>),
    /// Declaration error: undeclared class in a domain or range, conflicting inverses.
    Definition(String),
}

/// An asserted statement whose predicate's domain or range is not met.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaViolation {
    pub triple: Triple,
    pub problems: Vec<String>,
}

impl fmt::Display for SchemaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.triple, self.problems.join("; "))
    }
}

fn objects(triples: &[Triple], subject: &Term, predicate: &str) -> BTreeSet<Term> {
    triples
        .iter()
        .filter(|t| t.subject() == subject && t.predicate().text() == predicate)
        .map(|t| t.object().clone())
        .collect()
}

fn names(terms: &BTreeSet<Term>) -> String {
    let parts: Vec<String> = terms.iter().map(|t| t.to_ntriples()).collect();
    format!("{{{}}}", parts.join(", "))
}

impl SchemaDef {
    /// Reads declarations from asserted statements and checks that they are
    /// consistent. Inverse declarations are made symmetric.
    pub fn from_triples(triples: &[Triple]) -> Result<SchemaDef, SchemaProblem> {
        let declared = |class: &str| -> Vec<Term> {
            let set: BTreeSet<Term> = triples
                .iter()
                .filter(|t| t.predicate().text() == vocab::RDF_TYPE && t.object().text() == class && t.object().is_iri())
                .map(|t| t.subject().clone())
                .collect();
            set.into_iter().collect()
        };
        let mut schema = SchemaDef::default();
        for iri in declared(vocab::OWL_CLASS) {
            let parents = objects(triples, &iri, vocab::RDFS_SUBCLASS_OF);
            schema.classes.insert(iri.clone(), ClassDef { iri, parents });
        }
        for iri in declared(vocab::OWL_OBJECT_PROPERTY) {
            let inverses = objects(triples, &iri, vocab::OWL_INVERSE_OF);
            if inverses.len() > 1 {
                return Err(SchemaProblem::Definition(format!("{iri} declares several inverses")));
            }
            schema.object_properties.insert(
                iri.clone(),
                ObjectPropertyDef {
                    domains: objects(triples, &iri, vocab::RDFS_DOMAIN),
                    ranges: objects(triples, &iri, vocab::RDFS_RANGE),
                    inverse: inverses.into_iter().next(),
                    iri,
                },
            );
        }
        for iri in declared(vocab::OWL_DATATYPE_PROPERTY) {
            schema.data_properties.insert(
                iri.clone(),
                DataPropertyDef {
                    domains: objects(triples, &iri, vocab::RDFS_DOMAIN),
                    iri,
                },
            );
        }

        let pairs: Vec<(Term, Term)> = schema
            .object_properties
            .values()
            .filter_map(|p| p.inverse.clone().map(|q| (p.iri.clone(), q)))
            .collect();
        for (p, q) in pairs {
            let Some(other) = schema.object_properties.get_mut(&q) else {
                return Err(SchemaProblem::Definition(format!(
                    "{p} is declared inverse of {q}, which is not an object property"
                )));
            };
            match &other.inverse {
                None => other.inverse = Some(p),
                Some(back) if *back == p => {}
                Some(back) => {
                    return Err(SchemaProblem::Definition(format!(
                        "{q} is inverse of both {p} and {back}"
                    )))
                }
            }
        }

        let check_class = |what: &str, prop: &Term, class: &Term| {
            if schema.classes.contains_key(class) {
                Ok(())
            } else {
                Err(SchemaProblem::Definition(format!("{what} {class} of {prop} is not a declared class")))
            }
        };
        for p in schema.object_properties.values() {
            for c in &p.domains {
                check_class("domain", &p.iri, c)?;
            }
            for c in &p.ranges {
                check_class("range", &p.iri, c)?;
            }
        }
        for p in schema.data_properties.values() {
            for c in &p.domains {
                check_class("domain", &p.iri, c)?;
            }
        }
        Ok(schema)
    }

    /// Fails with the first subClassOf cycle found among `triples`.
    pub fn check_acyclic(triples: &[Triple]) -> Result<(), SchemaProblem> {
        let mut edges: BTreeMap<&Term, Vec<&Term>> = BTreeMap::new();
        for t in triples.iter().filter(|t| t.predicate().text() == vocab::RDFS_SUBCLASS_OF) {
            edges.entry(t.subject()).or_default().push(t.object());
        }
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state: HashMap<&Term, u8> = HashMap::new();
        fn visit<'a>(
            node: &'a Term,
            edges: &BTreeMap<&'a Term, Vec<&'a Term>>,
            state: &mut HashMap<&'a Term, u8>,
            stack: &mut Vec<&'a Term>,
        ) -> Option<Vec<Term>> {
            state.insert(node, 1);
            stack.push(node);
            for &next in edges.get(node).map(Vec::as_slice).unwrap_or_default() {
                match state.get(next).copied().unwrap_or(0) {
                    1 => {
                        let start = stack.iter().position(|n| *n == next).expect("on stack");
                        let mut cycle: Vec<Term> = stack[start..].iter().map(|t| (*t).clone()).collect();
                        cycle.push(next.clone());
                        return Some(cycle);
                    }
                    0 => {
                        if let Some(c) = visit(next, edges, state, stack) {
                            return Some(c);
                        }
                    }
                    _ => {}
                }
            }
            stack.pop();
            state.insert(node, 2);
            None
        }
        for &node in edges.keys() {
            if state.get(node).copied().unwrap_or(0) == 0 {
                if let Some(cycle) = visit(node, &edges, &mut state, &mut Vec::new()) {
                    return Err(SchemaProblem::Cycle(cycle));
                }
            }
        }
        Ok(())
    }

    /// Checks every asserted statement using a declared property against
    /// its domain and range, under the types found in `store` (which should
    /// already be saturated so that types are lifted through subClassOf).
    pub fn validate<'a>(&self, store: &TripleStore, asserted: impl IntoIterator<Item = &'a Triple>) -> Vec<SchemaViolation> {
        let rdf_type = Term::Iri(vocab::RDF_TYPE.into());
        let types_of = |t: &Term| -> BTreeSet<Term> {
            if !t.is_iri() {
                return BTreeSet::new();
            }
            store
                .matches(&TriplePattern::new(t.clone(), rdf_type.clone(), Term::Variable("c".into())))
                .into_iter()
                .map(|t| t.object().clone())
                .collect()
        };
        let mut violations = Vec::new();
        for triple in asserted {
            let mut problems = Vec::new();
            if let Some(prop) = self.object_properties.get(triple.predicate()) {
                if !prop.domains.is_empty() {
                    let types = types_of(triple.subject());
                    if types.is_disjoint(&prop.domains) {
                        problems.push(format!(
                            "subject types {} not in domain {}",
                            names(&types),
                            names(&prop.domains)
                        ));
                    }
                }
                if triple.object().is_literal() {
                    problems.push("object property with a literal value".to_owned());
                } else if !prop.ranges.is_empty() {
                    let types = types_of(triple.object());
                    if types.is_disjoint(&prop.ranges) {
                        problems.push(format!(
                            "object types {} not in range {}",
                            names(&types),
                            names(&prop.ranges)
                        ));
                    }
                }
            } else if let Some(prop) = self.data_properties.get(triple.predicate()) {
                if !prop.domains.is_empty() {
                    let types = types_of(triple.subject());
                    if types.is_disjoint(&prop.domains) {
                        problems.push(format!(
                            "subject types {} not in domain {}",
                            names(&types),
                            names(&prop.domains)
                        ));
                    }
                }
                if !triple.object().is_literal() {
                    problems.push("data property with a non-literal value".to_owned());
                }
            }
            if !problems.is_empty() {
                violations.push(SchemaViolation {
                    triple: triple.clone(),
                    problems,
                });
            }
        }
        violations
    }

    /// True if `class` is `ancestor` or reaches it through declared parents.
    pub fn is_subclass(&self, class: &Term, ancestor: &Term) -> bool {
        let mut stack = vec![class];
        let mut seen = BTreeSet::new();
        while let Some(c) = stack.pop() {
            if c == ancestor {
                return true;
            }
            if seen.insert(c) {
                if let Some(def) = self.classes.get(c) {
                    stack.extend(def.parents.iter());
                }
            }
        }
        false
    }
}
