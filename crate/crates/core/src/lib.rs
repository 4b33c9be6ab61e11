//! Split a graph drawing into `k` planes at random and keep only the
//! crossings that survive.
//!
//! The library builds *partition schemes*: recipes that assign every vertex a
//! random label from a small base set and route every edge into one of `k`
//! planes according to where its endpoint labels land.  Two edges that cross
//! in the input drawing survive as a crossing only when they end up in the
//! same plane and, more sharply, in the same connected component of that
//! plane's base subgraph.  The probability `q` of that event is computed
//! exactly, by enumeration over the label space, so every scheme ships with a
//! certified expected crossing count `q * cr(D)`.
//!
//! Modules:
//!
//! * [`designs`]: resolvable block designs and one-factorizations, the
//!   combinatorial raw material for schemes.
//! * [`schemes`]: partition schemes themselves, their validation and JSON
//!   round trips.
//! * [`probability`]: exact survival probabilities, closed forms and the
//!   bounds table comparing scheme families per `k`.
//! * [`drawing`]: rectilinear and abstract drawings, exact crossing
//!   detection, convex and two-line generators.
//! * [`splitter`]: seeded random splitting of a concrete drawing, Monte
//!   Carlo estimation, best-of search and per-plane layout.
//!
//! Exact arithmetic is the default: probabilities and coordinates are
//! [`Rational`] unless a caller instantiates the generic entry points with a
//! float type.

pub mod designs;
pub mod drawing;
pub mod probability;
pub mod rng;
pub mod scalar;
pub mod schemes;
pub mod splitter;

/// Arbitrary precision rational, the default exact scalar.
pub type Rational = num_rational::BigRational;

/// Default scalar for drawing coordinates.
///
/// Exact coordinates keep the crossing predicate free of rounding: the
/// generators produce integer coordinates, and translated per-plane layouts
/// stay exactly representable.
pub type Coord = Rational;

pub use scalar::Scalar;

/// Line-addressed parse failure, shared by all text formats in the crate.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

impl ParseError {
    pub fn new(line: usize, msg: impl Into<String>) -> Self {
        ParseError { line, msg: msg.into() }
    }
}
