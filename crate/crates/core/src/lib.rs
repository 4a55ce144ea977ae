//! Exact-arithmetic models of simple-normal-crossing degenerate fibers of
//! Fano families, with the verifiers and exhaustive searches that reproduce
//! their classification in low dimension.
//!
//! The crate is organized around five modules:
//!
//! - [`pic_surfaces`]: integer divisor-lattice arithmetic, positivity tests
//!   and the catalog of log surfaces on the three families `P2`, `P1xP1`
//!   and `Fn`;
//! - [`snc_fiber`]: the combinatorial fiber model with its dual complex,
//!   simplex test, triple-point formula and d-semistability checks;
//! - [`fano3_bundles`]: the parameterized threefold component families with
//!   boundary, normal-bundle and restriction tables;
//! - [`dp2_classify`]: the exhaustive enumeration of two-dimensional
//!   semistable fibers, which lands on exactly six cases;
//! - [`max3_search`]: the four-component search in dimension three proving
//!   the maximal degeneration unique, and the flag blow-up fibers realizing
//!   simplices of every admissible dimension.
//!
//! Everything is immutable value data and pure functions; the searches
//! parallelize over candidate tuples and merge deterministically, so output
//! is byte-identical across thread counts.

pub mod dp2_classify;
pub mod error;
pub mod fano3_bundles;
pub mod max3_search;
pub mod pic_surfaces;
pub mod snc_fiber;

pub use error::{Error, Result};
