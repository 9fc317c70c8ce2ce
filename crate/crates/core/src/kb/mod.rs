//! The agile-practice knowledge base: loads the ontology files, saturates
//! them with the rules, validates them against the schema, and answers
//! concerns and team recommendations.
//!
//! After loading, the base store is only ever read. A recommendation works
//! on a copy-on-write overlay that is dropped when the report is built.

mod cache;
mod catalog;
mod concerns;
mod schema;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLockReadGuard};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use cache::{cache_key, ResultCache};
pub use catalog::{Catalog, FactorEntry, GoalEntry, ValueEntry, CATALOG_NS};
pub use concerns::{parse_registry, Concern, RegistryError, PRACTICE_PLACEHOLDER, TEAM_PLACEHOLDER, TEAM_SUFFIX};
pub use schema::{ClassDef, DataPropertyDef, ObjectPropertyDef, SchemaDef, SchemaProblem, SchemaViolation};

use crate::error::StoreError;
use crate::rules::{
    explain, parse_rules_with, prove, saturate_with, Proof, ReasonError, RuleError, RuleSet, Saturation,
    DEFAULT_DERIVATION_LIMIT,
};
use crate::sparql::{evaluate, parse_query, QueryError, ResultTable};
use crate::store::{Graph, GraphMut, SharedStore, TripleStore};
use crate::term::{vocab, Interner, Term, Triple, TriplePattern};
use crate::turtle::{hash_triples, parse_turtle_with, PrefixMap, TurtleError};

/// Namespace of the ontology vocabulary.
pub const ONTO: &str = "http://obama.kb/onto#";

/// A syntax problem in one of the input files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub file: PathBuf,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.file.display())?;
        if let Some(line) = self.line {
            write!(f, ":{line}")?;
            if let Some(col) = self.column {
                write!(f, ":{col}")?;
            }
        }
        write!(f, ": {}", self.message)
    }
}

/// One reason a team profile was rejected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProfileIssue {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ProfileIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn join_lines<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error)]
pub enum KbError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("parse error: {0}")]
    Parse(ParseError),
    #[error("subClassOf cycle: {}", .0.iter().map(Term::to_ntriples).collect::<Vec<_>>().join(" -> "))]
    Cycle(Vec<Term>),
    #[error("invalid schema: {0}")]
    Schema(String),
    #[error("{} schema violation(s): {}", .0.len(), join_lines(.0))]
    SchemaViolations(Vec<SchemaViolation>),
    #[error("invalid catalog: {0}")]
    Catalog(String),
    #[error("duplicate concern id {0:?}")]
    DuplicateConcern(String),
    #[error("unknown concern {0:?}")]
    UnknownConcern(String),
    #[error("concern {concern:?} requires the {parameter:?} parameter")]
    MissingParameter { concern: String, parameter: String },
    #[error("invalid {parameter:?} parameter for concern {concern:?}: {message}")]
    InvalidParameter {
        concern: String,
        parameter: String,
        message: String,
    },
    #[error("invalid team profile: {}", join_lines(.0))]
    InvalidProfile(Vec<ProfileIssue>),
    #[error(transparent)]
    Reason(#[from] ReasonError),
    #[error("query of concern {concern:?} failed: {source}")]
    Query { concern: String, source: QueryError },
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Locations of the knowledge-base inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KbPaths {
    pub schema: PathBuf,
    pub ontology: PathBuf,
    pub rules: PathBuf,
    pub concerns: PathBuf,
    pub goals: PathBuf,
    pub factors: PathBuf,
    pub cache_dir: Option<PathBuf>,
}

impl KbPaths {
    /// The standard layout of a data directory.
    pub fn in_dir(dir: impl AsRef<Path>) -> KbPaths {
        let dir = dir.as_ref();
        KbPaths {
            schema: dir.join("schema.ttl"),
            ontology: dir.join("seed.ttl"),
            rules: dir.join("rules/default.rules"),
            concerns: dir.join("concerns.toml"),
            goals: dir.join("goals.ttl"),
            factors: dir.join("factors.ttl"),
            cache_dir: None,
        }
    }

    pub fn with_cache_dir(mut self, dir: impl Into<PathBuf>) -> KbPaths {
        self.cache_dir = Some(dir.into());
        self
    }
}

/// A named input text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Source {
    pub name: PathBuf,
    pub text: String,
}

impl Source {
    pub fn new(name: impl Into<PathBuf>, text: impl Into<String>) -> Source {
        Source {
            name: name.into(),
            text: text.into(),
        }
    }

    fn read(path: &Path) -> Result<Source, KbError> {
        let text = std::fs::read_to_string(path).map_err(|source| KbError::Io {
            path: path.to_owned(),
            source,
        })?;
        Ok(Source::new(path, text))
    }
}

/// Knowledge-base inputs held in memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sources {
    pub schema: Source,
    pub ontology: Source,
    pub rules: Source,
    pub concerns: Source,
    pub goals: Source,
    pub factors: Source,
}

impl Sources {
    pub fn read(paths: &KbPaths) -> Result<Sources, KbError> {
        Ok(Sources {
            schema: Source::read(&paths.schema)?,
            ontology: Source::read(&paths.ontology)?,
            rules: Source::read(&paths.rules)?,
            concerns: Source::read(&paths.concerns)?,
            goals: Source::read(&paths.goals)?,
            factors: Source::read(&paths.factors)?,
        })
    }
}

/// A team description: desired goals (IRIs) and one value per factor id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TeamProfile {
    #[serde(default)]
    pub goals: Vec<String>,
    #[serde(default)]
    pub situations: BTreeMap<String, String>,
}

/// A practice linked to the team by a derived edge, with the derivations
/// supporting that edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PracticeVerdict {
    pub practice: Term,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub traces: Vec<Proof>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RecommendationReport {
    pub team: Term,
    pub recommended: Vec<PracticeVerdict>,
    pub discouraged: Vec<PracticeVerdict>,
    pub concern_results: BTreeMap<String, ResultTable>,
}

/// Cache counters since load.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    pub evaluations: u64,
}

#[derive(Debug)]
pub struct KnowledgeBase {
    store: SharedStore,
    asserted: BTreeSet<Triple>,
    saturation: Arc<Saturation>,
    rules: RuleSet,
    schema: SchemaDef,
    concerns: Vec<Concern>,
    catalog: Catalog,
    prefixes: PrefixMap,
    content_hash: String,
    cache: Mutex<ResultCache>,
    cache_dir: Option<PathBuf>,
    derivation_limit: usize,
    hits: AtomicU64,
    misses: AtomicU64,
    evaluations: AtomicU64,
}

fn turtle_error(file: &Path, e: TurtleError) -> KbError {
    let (line, column) = match &e {
        TurtleError::Syntax { line, column, .. } | TurtleError::UnknownPrefix { line, column, .. } => (*line, *column),
    };
    let message = match e {
        TurtleError::Syntax { message, .. } => message,
        TurtleError::UnknownPrefix { label, .. } => format!("unknown prefix {label:?}"),
    };
    KbError::Parse(ParseError {
        file: file.to_owned(),
        line: Some(line),
        column: Some(column),
        message,
    })
}

fn rule_error(file: &Path, e: RuleError) -> KbError {
    let line = match &e {
        RuleError::Syntax { line, .. } | RuleError::UnknownPrefix { line, .. } => Some(*line),
        _ => None,
    };
    let message = match e {
        RuleError::Syntax { message, .. } => message,
        other => other.to_string(),
    };
    KbError::Parse(ParseError {
        file: file.to_owned(),
        line,
        column: None,
        message,
    })
}

fn registry_error(file: &Path, e: RegistryError) -> KbError {
    match e {
        RegistryError::Duplicate(id) => KbError::DuplicateConcern(id),
        RegistryError::Toml { line, message } => KbError::Parse(ParseError {
            file: file.to_owned(),
            line,
            column: None,
            message,
        }),
        RegistryError::Invalid { concern, message } => KbError::Parse(ParseError {
            file: file.to_owned(),
            line: None,
            column: None,
            message: format!("concern {concern:?}: {message}"),
        }),
    }
}

fn iri(text: &str) -> Term {
    Term::iri(text).expect("constant IRIs are valid")
}

fn onto(local: &str) -> Term {
    iri(&format!("{ONTO}{local}"))
}

fn var(name: &str) -> Term {
    Term::variable(name).expect("constant variable names are valid")
}

impl KnowledgeBase {
    /// Reads, parses, saturates and validates the inputs under `paths`.
    pub fn load(paths: &KbPaths) -> Result<KnowledgeBase, KbError> {
        let sources = Sources::read(paths)?;
        Self::from_sources(&sources, paths.cache_dir.clone())
    }

    pub fn from_sources(sources: &Sources, cache_dir: Option<PathBuf>) -> Result<KnowledgeBase, KbError> {
        Self::from_sources_with_limit(sources, cache_dir, DEFAULT_DERIVATION_LIMIT)
    }

    pub fn from_sources_with_limit(
        sources: &Sources,
        cache_dir: Option<PathBuf>,
        derivation_limit: usize,
    ) -> Result<KnowledgeBase, KbError> {
        let mut interner = Interner::new();
        let mut prefixes = PrefixMap::new();
        let mut docs = Vec::new();
        for src in [&sources.schema, &sources.ontology, &sources.goals, &sources.factors] {
            let doc = parse_turtle_with(&src.text, &mut interner).map_err(|e| turtle_error(&src.name, e))?;
            for (label, ns) in doc.prefixes.iter() {
                if prefixes.get(label).is_none() {
                    prefixes.insert(label, ns);
                }
            }
            docs.push(doc);
        }
        let rules = parse_rules_with(&sources.rules.text, &mut interner).map_err(|e| rule_error(&sources.rules.name, e))?;
        let concerns = parse_registry(&sources.concerns.text).map_err(|e| registry_error(&sources.concerns.name, e))?;

        let asserted: BTreeSet<Triple> = docs.iter().flat_map(|d| d.triples.iter().cloned()).collect();
        let all: Vec<Triple> = asserted.iter().cloned().collect();
        SchemaDef::check_acyclic(&all).map_err(|p| match p {
            SchemaProblem::Cycle(c) => KbError::Cycle(c),
            SchemaProblem::Definition(m) => KbError::Schema(m),
        })?;
        let schema = SchemaDef::from_triples(&all).map_err(|p| match p {
            SchemaProblem::Cycle(c) => KbError::Cycle(c),
            SchemaProblem::Definition(m) => KbError::Schema(m),
        })?;

        let mut store = TripleStore::from_triples(all.iter().cloned());
        let saturation = saturate_with(&mut store, &rules, all.iter().cloned(), None, derivation_limit)?;
        let violations = schema.validate(&store, &asserted);
        if !violations.is_empty() {
            return Err(KbError::SchemaViolations(violations));
        }

        let title = |class: &Term| -> Option<String> {
            store
                .matches(&TriplePattern::new(class.clone(), iri(vocab::RDFS_LABEL), var("l")))
                .into_iter()
                .find(|t| t.object().is_literal())
                .map(|t| t.object().text().to_owned())
        };
        let catalog = Catalog::build(&docs[2].triples, &docs[3].triples, title).map_err(KbError::Catalog)?;

        let content_hash = hash_triples(&asserted);
        let mut h = Sha256::new();
        h.update(sources.rules.text.as_bytes());
        h.update([0u8]);
        h.update(sources.concerns.text.as_bytes());
        let fingerprint = hex::encode(h.finalize());
        let cache = match &cache_dir {
            Some(dir) => ResultCache::load(dir, &content_hash, &fingerprint),
            None => ResultCache::new(&content_hash, &fingerprint),
        };
        tracing::debug!(
            asserted = asserted.len(),
            derived = saturation.derived().len(),
            hash = %content_hash,
            "knowledge base loaded"
        );
        Ok(KnowledgeBase {
            store: SharedStore::new(store),
            asserted,
            saturation: Arc::new(saturation),
            rules,
            schema,
            concerns,
            catalog,
            prefixes,
            content_hash,
            cache: Mutex::new(cache),
            cache_dir,
            derivation_limit,
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
            evaluations: AtomicU64::new(0),
        })
    }

    /// Read access to the saturated base store.
    pub fn store(&self) -> RwLockReadGuard<'_, TripleStore> {
        self.store.read()
    }

    pub fn asserted(&self) -> &BTreeSet<Triple> {
        &self.asserted
    }

    pub fn saturation(&self) -> &Saturation {
        &self.saturation
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    pub fn schema(&self) -> &SchemaDef {
        &self.schema
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn prefixes(&self) -> &PrefixMap {
        &self.prefixes
    }

    /// Content hash of the asserted statements of all input graphs.
    pub fn content_hash(&self) -> &str {
        &self.content_hash
    }

    /// Hash of everything currently in the base store, derived statements included.
    pub fn store_hash(&self) -> String {
        let store = self.store.read();
        let all: Vec<Triple> = store.iter().collect();
        hash_triples(&all)
    }

    pub fn cache_dir(&self) -> Option<&Path> {
        self.cache_dir.as_deref()
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            evaluations: self.evaluations.load(Ordering::Relaxed),
        }
    }

    /// Number of cached concern results.
    pub fn cached_entries(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }

    /// Browsable concerns, in registry order.
    pub fn list_concerns(&self) -> Vec<&Concern> {
        self.concerns.iter().filter(|c| !c.team_scoped).collect()
    }

    /// Concerns evaluated for a team during a recommendation.
    pub fn team_concerns(&self) -> Vec<&Concern> {
        self.concerns.iter().filter(|c| c.team_scoped).collect()
    }

    pub fn concern(&self, id: &str) -> Option<&Concern> {
        self.concerns.iter().find(|c| c.id == id && !c.team_scoped)
    }

    /// Resolves a full IRI or a prefixed name (`:Foo`, `owl:Class`) using
    /// the prefixes of the input files.
    pub fn resolve_iri(&self, text: &str) -> Option<Term> {
        let text = text.trim();
        let text = text.strip_prefix('<').and_then(|t| t.strip_suffix('>')).unwrap_or(text);
        if let Some((label, local)) = text.split_once(':') {
            if !local.starts_with("//") {
                if let Some(full) = self.prefixes.expand(label, local) {
                    return Term::iri(full).ok();
                }
            }
        }
        if text.contains(':') && !text.chars().any(|c| c.is_whitespace() || "<>\"{}|^`\\".contains(c)) {
            return Term::iri(text).ok();
        }
        None
    }

    /// Compact form of an IRI using the input prefixes, or `<iri>`.
    pub fn display(&self, term: &Term) -> String {
        if term.is_iri() {
            if let Some(c) = self.prefixes.compact(term.text()) {
                return c;
            }
        }
        term.to_ntriples()
    }

    /// First `:name` of a resource, in term order.
    pub fn label(&self, term: &Term) -> Option<String> {
        let store = self.store.read();
        label_in(&*store, term)
    }

    /// True if `term` is an instance of `class` in the saturated base store.
    pub fn has_type(&self, term: &Term, class: &Term) -> bool {
        has_type_in(&*self.store.read(), term, class)
    }

    /// Evaluates an ad-hoc query against the base store (not cached).
    pub fn query(&self, text: &str) -> Result<ResultTable, QueryError> {
        let query = parse_query(text)?;
        evaluate(&self.store, &query)
    }

    fn practice_parameter(&self, concern: &Concern, practice: Option<&str>) -> Result<Option<Term>, KbError> {
        let invalid = |message: String| KbError::InvalidParameter {
            concern: concern.id.clone(),
            parameter: "practice".into(),
            message,
        };
        match (concern.requires_practice, practice) {
            (false, None) => Ok(None),
            (false, Some(_)) => Err(invalid("this concern takes no practice".into())),
            (true, None) => Err(KbError::MissingParameter {
                concern: concern.id.clone(),
                parameter: "practice".into(),
            }),
            (true, Some(text)) => {
                let term = self
                    .resolve_iri(text)
                    .ok_or_else(|| invalid(format!("{text:?} is not an IRI")))?;
                if !self.has_type(&term, &onto("Practice")) {
                    return Err(invalid(format!("{term} is not a Practice")));
                }
                Ok(Some(term))
            }
        }
    }

    fn evaluate_concern(&self, concern: &Concern, practice: Option<&Term>) -> Result<ResultTable, KbError> {
        let query = concern
            .compile(practice.map(Term::text), None)
            .map_err(|source| KbError::Query {
                concern: concern.id.clone(),
                source,
            })?;
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        evaluate(&self.store, &query).map_err(|source| KbError::Query {
            concern: concern.id.clone(),
            source,
        })
    }

    fn persist(&self, cache: &ResultCache) {
        if let Some(dir) = &self.cache_dir {
            if let Err(e) = cache.save(dir) {
                tracing::warn!(dir = %dir.display(), error = %e, "cannot write result cache");
            }
        }
    }

    /// Answers a browsable concern, from the cache when possible.
    /// `practice` is required exactly when the concern's query mentions
    /// `{practice}`; it may be a full IRI or a prefixed name.
    pub fn answer_concern(&self, id: &str, practice: Option<&str>) -> Result<ResultTable, KbError> {
        let concern = self.concern(id).ok_or_else(|| KbError::UnknownConcern(id.to_owned()))?;
        let practice = self.practice_parameter(concern, practice)?;
        let key = cache_key(&concern.id, practice.as_ref().map(Term::text));
        let mut cache = self.cache.lock().expect("cache lock");
        if let Some(table) = cache.get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(table.clone());
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let table = self.evaluate_concern(concern, practice.as_ref())?;
        cache.insert(key, table.clone());
        self.persist(&cache);
        Ok(table)
    }

    /// Evaluates and caches every browsable concern that takes no parameter.
    /// Returns how many were evaluated (the rest were already cached).
    pub fn warm_cache(&self) -> Result<usize, KbError> {
        let mut cache = self.cache.lock().expect("cache lock");
        let mut evaluated = 0;
        for concern in self.list_concerns().into_iter().filter(|c| !c.requires_practice) {
            let key = cache_key(&concern.id, None);
            if cache.get(&key).is_none() {
                let table = self.evaluate_concern(concern, None)?;
                cache.insert(key, table);
                evaluated += 1;
            }
        }
        if evaluated > 0 {
            self.persist(&cache);
        }
        Ok(evaluated)
    }

    fn check_profile(&self, profile: &TeamProfile) -> Result<(Vec<Term>, Vec<Term>), KbError> {
        let mut issues = Vec::new();
        let mut goals: Vec<Term> = Vec::new();
        let goal_classes = [onto("Goal"), onto("Principle")];
        for g in &profile.goals {
            match self.resolve_iri(g) {
                Some(t) if goal_classes.iter().any(|c| self.has_type(&t, c)) => {
                    if !goals.contains(&t) {
                        goals.push(t);
                    }
                }
                _ => issues.push(ProfileIssue {
                    field: "goals".into(),
                    message: format!("{g:?} is not a known goal or principle"),
                }),
            }
        }
        let mut values = Vec::new();
        for (factor_id, value) in &profile.situations {
            let Some(factor) = self.catalog.factor(factor_id) else {
                issues.push(ProfileIssue {
                    field: format!("situations.{factor_id}"),
                    message: format!("unknown factor {factor_id:?}"),
                });
                continue;
            };
            let resolved = self.resolve_iri(value);
            match resolved.filter(|t| factor.values.iter().any(|v| v.iri == t.text())) {
                Some(t) => values.push(t),
                None => issues.push(ProfileIssue {
                    field: format!("situations.{factor_id}"),
                    message: format!("{value:?} is not a value of factor {factor_id:?}"),
                }),
            }
        }
        if issues.is_empty() {
            Ok((goals, values))
        } else {
            Err(KbError::InvalidProfile(issues))
        }
    }

    /// Builds a temporary team individual from the profile in an overlay,
    /// saturates the overlay, and reports the practices recommended for and
    /// discouraged for the team, with their derivations and the results of
    /// the team-scoped concerns. The base store is left untouched.
    pub fn recommend(&self, profile: &TeamProfile) -> Result<RecommendationReport, KbError> {
        let team = iri(&format!("{ONTO}Team_{}", uuid::Uuid::new_v4().simple()));
        self.recommend_as(profile, team)
    }

    /// [`recommend`](Self::recommend) with a caller-chosen team IRI, for
    /// reproducible output. The IRI must not occur in the knowledge base.
    pub fn recommend_as(&self, profile: &TeamProfile, team: Term) -> Result<RecommendationReport, KbError> {
        let (goals, situations) = self.check_profile(profile)?;
        if !team.is_iri() || self.mentions(&team) {
            return Err(KbError::InvalidProfile(vec![ProfileIssue {
                field: "team".into(),
                message: format!("{team} is not a fresh IRI"),
            }]));
        }
        let rdf_type = iri(vocab::RDF_TYPE);
        let mut added = vec![Triple::new(team.clone(), rdf_type, onto("Team")).expect("valid")];
        for g in goals {
            added.push(Triple::new(team.clone(), onto("desiresGoal"), g).expect("valid"));
        }
        for s in situations {
            added.push(Triple::new(team.clone(), onto("hasSituation"), s).expect("valid"));
        }

        let mut overlay = self.store.overlay();
        for t in &added {
            overlay.insert(t.clone())?;
        }
        let sat = saturate_with(
            &mut overlay,
            &self.rules,
            added,
            Some(Arc::clone(&self.saturation)),
            self.derivation_limit,
        )?;

        let verdicts = |edge: &str| -> Result<Vec<PracticeVerdict>, KbError> {
            let pattern = TriplePattern::new(var("p"), onto(edge), team.clone());
            let mut out = Vec::new();
            for t in overlay.match_pattern(&pattern)? {
                let mut traces = Vec::new();
                for trace in explain(&overlay, &self.rules, &sat, &t)? {
                    let premises = trace
                        .premises
                        .iter()
                        .map(|p| prove(&overlay, &self.rules, &sat, p))
                        .collect::<Result<Vec<_>, _>>()?;
                    traces.push(Proof {
                        triple: t.clone(),
                        rule: Some(trace.rule),
                        premises,
                    });
                }
                out.push(PracticeVerdict {
                    label: label_in(&overlay, t.subject()),
                    practice: t.subject().clone(),
                    traces,
                });
            }
            Ok(out)
        };
        let recommended = verdicts("recommendedFor")?;
        let discouraged = verdicts("discouragedFor")?;

        let mut concern_results = BTreeMap::new();
        for concern in self.team_concerns() {
            let q = concern.compile(None, Some(team.text())).map_err(|source| KbError::Query {
                concern: concern.id.clone(),
                source,
            })?;
            let table = evaluate(&overlay, &q).map_err(|source| KbError::Query {
                concern: concern.id.clone(),
                source,
            })?;
            concern_results.insert(concern.id.clone(), table);
        }
        Ok(RecommendationReport {
            team,
            recommended,
            discouraged,
            concern_results,
        })
    }
}

impl KnowledgeBase {
    fn mentions(&self, term: &Term) -> bool {
        let store = self.store();
        let any = |p: TriplePattern| !store.matches(&p).is_empty();
        any(TriplePattern::new(term.clone(), var("p"), var("o"))) || any(TriplePattern::new(var("s"), var("p"), term.clone()))
    }
}

fn label_in<G: Graph + ?Sized>(graph: &G, term: &Term) -> Option<String> {
    if !term.is_iri() {
        return None;
    }
    graph
        .match_pattern(&TriplePattern::new(term.clone(), onto("name"), var("n")))
        .ok()?
        .into_iter()
        .find(|t| t.object().is_literal())
        .map(|t| t.object().text().to_owned())
}

fn has_type_in<G: Graph + ?Sized>(graph: &G, term: &Term, class: &Term) -> bool {
    term.is_iri()
        && Triple::new(term.clone(), iri(vocab::RDF_TYPE), class.clone())
            .ok()
            .is_some_and(|t| graph.contains(&t).unwrap_or(false))
}
