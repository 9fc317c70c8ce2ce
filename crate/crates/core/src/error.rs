use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("malformed term: empty text")]
    Empty,
    #[error("malformed term: IRI contains whitespace: {0:?}")]
    Whitespace(String),
    #[error("malformed term: datatype given for non-literal {0:?}")]
    DatatypeOnNonLiteral(String),
    #[error("{1} is not allowed in {0} position")]
    Position(&'static str, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("overlay is stale: base store changed from generation {expected} to {actual}")]
    StaleOverlay { expected: u64, actual: u64 },
}
