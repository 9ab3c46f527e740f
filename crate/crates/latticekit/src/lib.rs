//! Rank-1 lattice rules for multivariate periodic function approximation
//! in weighted Korobov spaces.
//!
//! The crate constructs generating vectors component by component for a
//! fixed number of points (prime or composite) and embedded lattice
//! sequences over n = p^m ranges, evaluates the search criterion that
//! drives the construction, applies the resulting rules as trigonometric
//! approximation operators and kernel interpolants, and evaluates the
//! worst-case L2/L∞ error bounds attached to the construction.
//!
//! Modules:
//! - [`weights`]: the subset-weight families (explicit, product, POD, SPOD);
//! - [`korobov`]: decay function, kernel, index sets, cardinality and
//!   truncation bounds;
//! - [`criterion`]: the search criterion S, its dimension-wise components,
//!   and the independent brute-force evaluation;
//! - [`cbc`]: the two construction algorithms plus all bound evaluators;
//! - [`approx`]: the lattice approximation operator and kernel interpolant;
//! - [`io`]: file formats for vectors, weights, and CSV reports.

pub mod approx;
pub mod cbc;
pub mod criterion;
pub mod error;
pub mod io;
pub mod korobov;
pub mod weights;
pub mod zeta;

pub use error::{LatticeError, Result};
