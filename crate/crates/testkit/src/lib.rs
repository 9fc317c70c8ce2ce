//! Test support shared by the agilekb suites: random graphs, queries, rule
//! sets and Turtle documents, and reference implementations that answer the
//! same questions by exhaustive enumeration.
//!
//! The oracles deliberately share no code with the engine beyond the term
//! types.

pub mod graph;
pub mod reasoner;
pub mod sparql;

use agilekb_core::Term;

/// Ordering used by `ORDER BY`: lexical text, then IRIs before literals,
/// then datatype.
pub fn order_key(t: &Term) -> (String, u8, String) {
    let rank = if t.is_iri() { 0 } else { 1 };
    (t.text().to_owned(), rank, t.datatype().unwrap_or_default().to_owned())
}
