//! Numerical verification: weighted operator-norm brackets, kernel bounds
//! and the theorem-level checks built on them.

mod checks;
mod gaussian;
mod opnorm;
mod plancherel;
mod report;

pub use checks::*;
pub use gaussian::*;
pub use opnorm::*;
pub use plancherel::*;
pub use report::*;
