//! Identity and asymptotic checks, exponent fits and the theorem-scale
//! diagnostics.

pub mod checks;
pub mod fit;
pub mod mainterms;
pub mod theorem;
pub mod thresholds;

pub use checks::{run_suite, CheckOutcome, Suite, SuiteReport};
pub use fit::{exponent_fit, FitReport};
pub use thresholds::Thresholds;
