//! Crate error type.

use thiserror::Error;

/// Everything that can go wrong while parsing or validating inputs, plus the
/// internal-verification sentinel used by the reconstruction routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed file or string input (JSON syntax, bad rational string,
    /// I/O failure while reading an input).
    #[error("parse error: {0}")]
    Parse(String),

    /// A distance matrix violated the ultrametric inequality; the offending
    /// triple of point labels is reported.
    #[error("ultrametric inequality violated on triple ({a}, {b}, {c}): d({a},{c}) > max(d({a},{b}), d({b},{c}))")]
    UltrametricViolation { a: String, b: String, c: String },

    /// Two distinct points at distance zero.
    #[error("duplicate points: d({a},{b}) = 0 off the diagonal")]
    DuplicatePoints { a: String, b: String },

    /// Structural problem with a tree description.
    #[error("invalid tree: {0}")]
    InvalidTree(String),

    /// Transition probabilities that are not a nearest neighbour stochastic
    /// matrix with absorbing leaves.
    #[error("invalid walk: {0}")]
    InvalidWalk(String),

    /// A radius labelling that is not positive and strictly decreasing.
    #[error("invalid ultrametric element: {0}")]
    InvalidElement(String),

    /// A boundary measure that is not a fully supported probability vector.
    #[error("invalid boundary measure: {0}")]
    InvalidMeasure(String),

    /// A radius distribution incompatible with the given radius labelling.
    #[error("invalid sigma measure: {0}")]
    InvalidSigma(String),

    /// Any other semantically invalid input (bad parameters, id mismatches).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An exact self-check failed inside a routine whose postconditions are
    /// mathematically guaranteed; this always signals an implementation bug,
    /// never bad input.
    #[error("internal verification failure: {0}")]
    Internal(String),
}
