//! Numeric laboratory for the third moment of primes in arithmetic
//! progressions: prime-side moment sums, Euler-product constants,
//! Dirichlet-series factorizations, contour quadrature and the lattice
//! sums that feed the main-term checks.

pub mod analytic;
pub mod arith;
pub mod constants;
pub mod error;
pub mod lattice;
pub mod local;
pub mod moments;
pub mod sieve;
pub mod sum;
pub mod verify;

pub use error::{Error, Result};
