//! Concern registry: pre-written queries answering practitioner questions,
//! read from a TOML file of `[[concern]]` tables.

use serde::{Deserialize, Serialize};

use crate::sparql::{parse_query, Query, QueryError};

pub const PRACTICE_PLACEHOLDER: &str = "{practice}";
pub const TEAM_PLACEHOLDER: &str = "{team}";

/// Suffix of the id given to the team-scoped variant of a concern.
pub const TEAM_SUFFIX: &str = "-for-team";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Concern {
    pub id: String,
    pub title: String,
    pub description: String,
    pub team_scoped: bool,
    pub requires_practice: bool,
    #[serde(skip)]
    pub template: String,
}

impl Concern {
    /// Query text with placeholders replaced by `<iri>`.
    pub fn instantiate(&self, practice: Option<&str>, team: Option<&str>) -> String {
        let mut text = self.template.clone();
        if let Some(p) = practice {
            text = text.replace(PRACTICE_PLACEHOLDER, &format!("<{p}>"));
        }
        if let Some(t) = team {
            text = text.replace(TEAM_PLACEHOLDER, &format!("<{t}>"));
        }
        text
    }

    pub fn compile(&self, practice: Option<&str>, team: Option<&str>) -> Result<Query, QueryError> {
        parse_query(&self.instantiate(practice, team))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegistryError {
    Toml { line: Option<usize>, message: String },
    Duplicate(String),
    Invalid { concern: String, message: String },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryFile {
    #[serde(default)]
    concern: Vec<Entry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    id: String,
    title: String,
    #[serde(default)]
    description: String,
    query: String,
    team_query: Option<String>,
}

const DUMMY_IRI: &str = "urn:agilekb:placeholder";

fn check(concern: &Concern) -> Result<(), RegistryError> {
    let invalid = |message: String| RegistryError::Invalid {
        concern: concern.id.clone(),
        message,
    };
    if concern.id.is_empty() || !concern.id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
        return Err(invalid("id must be non-empty and use only letters, digits, '-' and '_'".into()));
    }
    if concern.team_scoped && concern.template.contains(PRACTICE_PLACEHOLDER) {
        return Err(invalid("team-scoped queries cannot take a practice".into()));
    }
    if concern.team_scoped && !concern.template.contains(TEAM_PLACEHOLDER) {
        return Err(invalid("team query does not mention {team}".into()));
    }
    if !concern.team_scoped && concern.template.contains(TEAM_PLACEHOLDER) {
        return Err(invalid("{team} is only allowed in team_query".into()));
    }
    concern
        .compile(Some(DUMMY_IRI), Some(DUMMY_IRI))
        .map(|_| ())
        .map_err(|e| invalid(e.to_string()))
}

/// Parses the registry. Every query must parse once its placeholders are
/// filled; ids, including the derived `<id>-for-team` ones, must be unique.
pub fn parse_registry(text: &str) -> Result<Vec<Concern>, RegistryError> {
    let file: RegistryFile = toml::from_str(text).map_err(|e| RegistryError::Toml {
        line: e.span().map(|s| text[..s.start].matches('\n').count() + 1),
        message: e.message().to_owned(),
    })?;
    let mut out: Vec<Concern> = Vec::new();
    for entry in file.concern {
        let base = Concern {
            requires_practice: entry.query.contains(PRACTICE_PLACEHOLDER),
            id: entry.id.clone(),
            title: entry.title.clone(),
            description: entry.description.clone(),
            team_scoped: false,
            template: entry.query,
        };
        let team = entry.team_query.map(|q| Concern {
            id: format!("{}{TEAM_SUFFIX}", entry.id),
            title: entry.title,
            description: entry.description,
            team_scoped: true,
            requires_practice: false,
            template: q,
        });
        for concern in std::iter::once(base).chain(team) {
            check(&concern)?;
            if out.iter().any(|c| c.id == concern.id) {
                return Err(RegistryError::Duplicate(concern.id));
            }
            out.push(concern);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE: &str = r#"
[[concern]]
id = "a"
title = "A"
query = "SELECT ?x WHERE { {practice} <http://ex/p> ?x }"
team_query = "SELECT ?x WHERE { ?x <http://ex/for> {team} }"
"#;

    #[test]
    fn parses_with_team_variant() {
        let concerns = parse_registry(ONE).unwrap();
        assert_eq!(concerns.len(), 2);
        assert!(concerns[0].requires_practice && !concerns[0].team_scoped);
        assert_eq!(concerns[1].id, "a-for-team");
        assert!(concerns[1].team_scoped);
        assert_eq!(
            concerns[0].instantiate(Some("http://ex/P"), None),
            "SELECT ?x WHERE { <http://ex/P> <http://ex/p> ?x }"
        );
    }

    #[test]
    fn duplicate_ids() {
        let text = format!("{ONE}\n{ONE}");
        assert_eq!(parse_registry(&text), Err(RegistryError::Duplicate("a".into())));
        let clash = r#"
[[concern]]
id = "a-for-team"
title = "x"
query = "SELECT ?x WHERE { ?x ?p ?o }"
"#;
        let text = format!("{clash}\n{ONE}");
        assert_eq!(parse_registry(&text), Err(RegistryError::Duplicate("a-for-team".into())));
    }

    #[test]
    fn rejects_bad_queries() {
        let bad = "[[concern]]\nid = \"b\"\ntitle = \"B\"\nquery = \"SELECT ?y WHERE { ?x ?p ?o }\"\n";
        assert!(matches!(parse_registry(bad), Err(RegistryError::Invalid { .. })));
        let misplaced = "[[concern]]\nid = \"b\"\ntitle = \"B\"\nquery = \"SELECT ?x WHERE { ?x ?p {team} }\"\n";
        assert!(matches!(parse_registry(misplaced), Err(RegistryError::Invalid { .. })));
        assert!(matches!(parse_registry("[[concern]]\nid = 3"), Err(RegistryError::Toml { line: Some(2), .. })));
    }

    #[test]
    fn registry_file_parses() {
        let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/concerns.toml")).unwrap();
        let concerns = parse_registry(&text).unwrap();
        let browse: Vec<&str> = concerns.iter().filter(|c| !c.team_scoped).map(|c| c.id.as_str()).collect();
        assert_eq!(
            browse,
            [
                "practices-overview",
                "activities-of-practice",
                "goals-of-practice",
                "problems-of-practice",
                "solutions-for-problems",
                "requisites-and-situations"
            ]
        );
        assert_eq!(concerns.iter().filter(|c| c.team_scoped).count(), 4);
    }
}
