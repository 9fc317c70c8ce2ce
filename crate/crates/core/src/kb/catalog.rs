//! Input catalogs offered when building a team profile: the goal list and
//! the situational factors with their admissible values.

use std::collections::BTreeSet;

use serde::Serialize;

use super::ONTO;
use crate::term::{vocab, Term, Triple};

pub const CATALOG_NS: &str = "http://obama.kb/catalog#";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GoalEntry {
    pub iri: String,
    pub label: String,
    /// Local name of the goal's class: `Goal` or `Principle`.
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValueEntry {
    pub iri: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorEntry {
    pub id: String,
    pub class: String,
    pub title: String,
    pub values: Vec<ValueEntry>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Catalog {
    pub goals: Vec<GoalEntry>,
    pub factors: Vec<FactorEntry>,
}

fn first_name(triples: &[Triple], subject: &Term) -> Option<String> {
    let name = format!("{ONTO}name");
    triples
        .iter()
        .find(|t| t.subject() == subject && t.predicate().text() == name && t.object().is_literal())
        .map(|t| t.object().text().to_owned())
}

fn local(iri: &str) -> &str {
    iri.rsplit(['#', '/']).next().unwrap_or(iri)
}

impl Catalog {
    /// Builds the catalog from the statements of the goals and factors
    /// files, in document order. `title_of` supplies factor titles.
    pub fn build(
        goals: &[Triple],
        factors: &[Triple],
        title_of: impl Fn(&Term) -> Option<String>,
    ) -> Result<Catalog, String> {
        let goal_classes = [format!("{ONTO}Goal"), format!("{ONTO}Principle")];
        let mut catalog = Catalog::default();
        let mut seen = BTreeSet::new();
        for t in goals {
            if t.predicate().text() == vocab::RDF_TYPE && goal_classes.iter().any(|c| c == t.object().text()) {
                if !seen.insert(t.subject().clone()) {
                    continue;
                }
                let label = first_name(goals, t.subject()).unwrap_or_else(|| local(t.subject().text()).to_owned());
                catalog.goals.push(GoalEntry {
                    iri: t.subject().text().to_owned(),
                    label,
                    kind: local(t.object().text()).to_owned(),
                });
            }
        }

        let factor_id = format!("{CATALOG_NS}factorId");
        for t in factors.iter().filter(|t| t.predicate().text() == factor_id) {
            let class = t.subject();
            let id = t.object().text().to_owned();
            if catalog.factors.iter().any(|f| f.id == id) {
                return Err(format!("factor id {id:?} is used twice"));
            }
            let mut values = Vec::new();
            let mut seen = BTreeSet::new();
            for v in factors {
                if v.predicate().text() == vocab::RDF_TYPE && v.object() == class && seen.insert(v.subject().clone()) {
                    values.push(ValueEntry {
                        iri: v.subject().text().to_owned(),
                        label: first_name(factors, v.subject()).unwrap_or_else(|| local(v.subject().text()).to_owned()),
                    });
                }
            }
            if values.len() < 2 {
                return Err(format!("factor {id:?} needs at least two values, found {}", values.len()));
            }
            catalog.factors.push(FactorEntry {
                title: title_of(class).unwrap_or_else(|| local(class.text()).to_owned()),
                class: class.text().to_owned(),
                id,
                values,
            });
        }
        Ok(catalog)
    }

    pub fn factor(&self, id: &str) -> Option<&FactorEntry> {
        self.factors.iter().find(|f| f.id == id)
    }
}
