//! Terms, triples and triple patterns.
//!
//! Terms share their text through `Arc<str>`; an [`Interner`] hands out the
//! same allocation for equal text so that large graphs do not duplicate
//! IRIs. Equality and ordering never depend on the allocation, only on the
//! kind, the text and the datatype.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::TermError;

pub mod vocab {
    pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
    pub const RDFS_DOMAIN: &str = "http://www.w3.org/2000/01/rdf-schema#domain";
    pub const RDFS_RANGE: &str = "http://www.w3.org/2000/01/rdf-schema#range";
    pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
    pub const OWL_CLASS: &str = "http://www.w3.org/2002/07/owl#Class";
    pub const OWL_OBJECT_PROPERTY: &str = "http://www.w3.org/2002/07/owl#ObjectProperty";
    pub const OWL_DATATYPE_PROPERTY: &str = "http://www.w3.org/2002/07/owl#DatatypeProperty";
    pub const OWL_INVERSE_OF: &str = "http://www.w3.org/2002/07/owl#inverseOf";
    pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermKind {
    Iri,
    Literal,
    Variable,
}

/// An IRI, a literal or a query/rule variable.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Iri(Arc<str>),
    Literal {
        value: Arc<str>,
        datatype: Option<Arc<str>>,
    },
    /// Variable name without the leading `?`.
    Variable(Arc<str>),
}

fn check_iri(text: &str) -> Result<(), TermError> {
    if text.is_empty() {
        return Err(TermError::Empty);
    }
    if text.chars().any(char::is_whitespace) {
        return Err(TermError::Whitespace(text.to_owned()));
    }
    Ok(())
}

impl Term {
    pub fn iri(text: impl AsRef<str>) -> Result<Term, TermError> {
        let text = text.as_ref();
        check_iri(text)?;
        Ok(Term::Iri(Arc::from(text)))
    }

    pub fn literal(value: impl AsRef<str>) -> Term {
        Term::Literal {
            value: Arc::from(value.as_ref()),
            datatype: None,
        }
    }

    pub fn typed_literal(value: impl AsRef<str>, datatype: impl AsRef<str>) -> Result<Term, TermError> {
        let datatype = datatype.as_ref();
        check_iri(datatype)?;
        Ok(Term::Literal {
            value: Arc::from(value.as_ref()),
            datatype: Some(Arc::from(datatype)),
        })
    }

    pub fn variable(name: impl AsRef<str>) -> Result<Term, TermError> {
        let name = name.as_ref();
        if name.is_empty() {
            return Err(TermError::Empty);
        }
        Ok(Term::Variable(Arc::from(name)))
    }

    pub fn kind(&self) -> TermKind {
        match self {
            Term::Iri(_) => TermKind::Iri,
            Term::Literal { .. } => TermKind::Literal,
            Term::Variable(_) => TermKind::Variable,
        }
    }

    /// Full IRI, literal lexical value, or variable name.
    pub fn text(&self) -> &str {
        match self {
            Term::Iri(t) | Term::Variable(t) => t,
            Term::Literal { value, .. } => value,
        }
    }

    pub fn datatype(&self) -> Option<&str> {
        match self {
            Term::Literal { datatype, .. } => datatype.as_deref(),
            _ => None,
        }
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal { .. })
    }

    pub fn is_variable(&self) -> bool {
        matches!(self, Term::Variable(_))
    }

    /// N-Triples style rendering: `<iri>`, `"lit"`, `"lit"^^<dt>` or `?var`.
    pub fn to_ntriples(&self) -> String {
        match self {
            Term::Iri(t) => format!("<{t}>"),
            Term::Literal { value, datatype } => {
                let mut out = format!("\"{}\"", escape_literal(value));
                if let Some(dt) = datatype {
                    out.push_str("^^<");
                    out.push_str(dt);
                    out.push('>');
                }
                out
            }
            Term::Variable(v) => format!("?{v}"),
        }
    }
}

/// Escapes `"`, `\` and line breaks for a double-quoted literal.
pub fn escape_literal(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
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

impl Ord for Term {
    // Text first (code point order), then IRI < literal < variable, then datatype.
    fn cmp(&self, other: &Self) -> Ordering {
        self.text()
            .cmp(other.text())
            .then_with(|| self.kind().cmp(&other.kind()))
            .then_with(|| self.datatype().cmp(&other.datatype()))
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ntriples())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ntriples())
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    kind: TermKind,
    text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    datatype: Option<String>,
}

impl Serialize for Term {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        TermRepr {
            kind: self.kind(),
            text: self.text().to_owned(),
            datatype: self.datatype().map(str::to_owned),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Term {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = TermRepr::deserialize(deserializer)?;
        let mut interner = Interner::default();
        let term = match repr.kind {
            TermKind::Literal => interner.literal(&repr.text, repr.datatype.as_deref()),
            kind => interner.intern(kind, &repr.text, repr.datatype.as_deref()),
        };
        term.map_err(serde::de::Error::custom)
    }
}

/// Shares term text between equal terms.
#[derive(Debug, Default)]
pub struct Interner {
    strings: HashSet<Arc<str>>,
}

impl Interner {
    pub fn new() -> Self {
        Self::default()
    }

    fn share(&mut self, text: &str) -> Arc<str> {
        if let Some(existing) = self.strings.get(text) {
            return existing.clone();
        }
        let shared: Arc<str> = Arc::from(text);
        self.strings.insert(shared.clone());
        shared
    }

    /// Builds a canonical term from non-empty text.
    pub fn intern(&mut self, kind: TermKind, text: &str, datatype: Option<&str>) -> Result<Term, TermError> {
        if datatype.is_some() && kind != TermKind::Literal {
            return Err(TermError::DatatypeOnNonLiteral(text.to_owned()));
        }
        if text.is_empty() {
            return Err(TermError::Empty);
        }
        match kind {
            TermKind::Iri => self.iri(text),
            TermKind::Literal => self.literal(text, datatype),
            TermKind::Variable => Ok(Term::Variable(self.share(text))),
        }
    }

    pub fn iri(&mut self, text: &str) -> Result<Term, TermError> {
        check_iri(text)?;
        Ok(Term::Iri(self.share(text)))
    }

    /// Literals may be empty (`""` is a valid literal in a document).
    pub fn literal(&mut self, value: &str, datatype: Option<&str>) -> Result<Term, TermError> {
        let datatype = match datatype {
            Some(dt) => {
                check_iri(dt)?;
                Some(self.share(dt))
            }
            None => None,
        };
        Ok(Term::Literal {
            value: self.share(value),
            datatype,
        })
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }
}

/// A stored statement. Subject and predicate are IRIs, the object an IRI
/// or a literal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    subject: Term,
    predicate: Term,
    object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Triple, TermError> {
        if !subject.is_iri() {
            return Err(TermError::Position("subject", subject.to_ntriples()));
        }
        if !predicate.is_iri() {
            return Err(TermError::Position("predicate", predicate.to_ntriples()));
        }
        if object.is_variable() {
            return Err(TermError::Position("object", object.to_ntriples()));
        }
        Ok(Triple {
            subject,
            predicate,
            object,
        })
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Term {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }

    pub fn into_parts(self) -> (Term, Term, Term) {
        (self.subject, self.predicate, self.object)
    }

    pub fn to_pattern(&self) -> TriplePattern {
        TriplePattern::new(self.subject.clone(), self.predicate.clone(), self.object.clone())
    }

    /// `<s> <p> <o> .` without trailing newline.
    pub fn to_ntriples(&self) -> String {
        format!(
            "{} {} {} .",
            self.subject.to_ntriples(),
            self.predicate.to_ntriples(),
            self.object.to_ntriples()
        )
    }
}

impl fmt::Debug for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ntriples())
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ntriples())
    }
}

impl Serialize for Triple {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [&self.subject, &self.predicate, &self.object].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Triple {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [s, p, o] = <[Term; 3]>::deserialize(deserializer)?;
        Triple::new(s, p, o).map_err(serde::de::Error::custom)
    }
}

/// A triple whose positions may hold variables.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl TriplePattern {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Self {
        TriplePattern {
            subject,
            predicate,
            object,
        }
    }

    pub fn positions(&self) -> [&Term; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    /// Distinct variable names in subject, predicate, object order.
    pub fn variables(&self) -> Vec<&str> {
        let mut vars: Vec<&str> = Vec::new();
        for term in self.positions() {
            if let Term::Variable(name) = term {
                if !vars.contains(&&**name) {
                    vars.push(name);
                }
            }
        }
        vars
    }

    /// True when every non-variable position equals the triple's.
    pub fn agrees_with(&self, triple: &Triple) -> bool {
        let fits = |p: &Term, t: &Term| p.is_variable() || p == t;
        fits(&self.subject, &triple.subject)
            && fits(&self.predicate, &triple.predicate)
            && fits(&self.object, &triple.object)
    }
}

impl fmt::Debug for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {} {})", self.subject, self.predicate, self.object)
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}
