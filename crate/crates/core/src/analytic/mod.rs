//! Complex zeta, Dirichlet-series factorizations, vertical-line quadrature,
//! residue formulas and the averaging operator.

pub mod bernoulli;
pub mod c_operator;
pub mod integrals;
pub mod quad;
pub mod residue;
pub mod series;
pub mod special;
pub mod zeta;

pub use num::complex::Complex64 as C64;
