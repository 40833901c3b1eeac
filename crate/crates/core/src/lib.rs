//! Exact computation on finite rooted trees with absorbing leaves: nearest
//! neighbour random walks, isotropic jump processes on the ultrametric leaf
//! boundary, and the duality between the two.
//!
//! The crate is organised around a handful of immutable value types:
//!
//! * [`tree::Tree`] — a finite rooted tree whose leaves play the role of the
//!   boundary, together with [`tree::UltrametricElement`] (a strictly
//!   decreasing radius labelling of interior vertices) and
//!   [`tree::UltrametricSpace`] (a raw distance matrix). The two views are
//!   interconvertible: every valid distance matrix is the leaf metric of a
//!   unique ball tree and vice versa.
//! * [`walk::Walk`] — a nearest neighbour transition matrix with absorbing
//!   leaves, and [`walk::WalkKernels`] — its hitting probabilities, Green
//!   kernel, reversible measure, conductances and harmonic measures, all as
//!   exact rationals.
//! * [`boundary::JumpProcessSpec`] — an isotropic jump process on the leaves
//!   given by a radius labelling, a boundary measure and a radius
//!   distribution; its transition semigroup, jump kernel, Dirichlet form and
//!   generator.
//! * [`duality`] — both directions of the correspondence between walks and
//!   boundary processes (Green radius / harmonic measure one way, exact
//!   transition-matrix reconstruction the other), the Naim kernel, and exact
//!   verification harnesses for the kernel identities they rest on.
//!
//! Everything that can be exact is exact: values are arbitrary-precision
//! rationals in lowest terms and checks are equality, not tolerance. Floats
//! appear only where real powers of distribution functions force them
//! (semigroup operators for non-integer time) and in Monte Carlo statistics.
//!
//! [`linalg`] holds a deliberately independent dense rational solver for
//! absorbing chains (fundamental matrix, absorption matrix, first-step
//! hitting systems) used to cross-check the linear-time recursions, and
//! [`simulate`] a deterministic seeded sampler for both processes.

#![forbid(unsafe_code)]

pub mod boundary;
pub mod duality;
pub mod error;
pub mod fixtures;
pub mod json;
pub mod linalg;
pub mod ratio;
pub mod report;
pub mod simulate;
pub mod tree;
pub mod walk;

pub use error::Error;
pub use ratio::Rat;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
