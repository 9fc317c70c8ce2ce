//! Knowledge base engine for agile practice adoption.
//!
//! The crate is layered bottom-up:
//!
//! - [`term`] and [`store`]: terms, triples, the indexed triple store and
//!   copy-on-write overlays.
//! - [`turtle`]: the ontology file format and its content hash.
//! - [`rules`]: inference rules, semi-naive saturation and derivation traces.
//! - [`sparql`]: the SELECT query subset used by concerns.
//! - [`kb`]: schema validation, the concern registry, the result cache and
//!   the team recommendation pipeline.

pub mod error;
pub mod kb;
pub mod rules;
pub mod sparql;
pub mod store;
pub mod term;
pub mod turtle;

pub use error::{StoreError, TermError};
pub use store::{Graph, GraphMut, OverlayStore, SharedStore, TripleStore};
pub use term::{Interner, Term, TermKind, Triple, TriplePattern};
