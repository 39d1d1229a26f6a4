//! Weighted spectral multipliers on finite metric measure spaces.

pub mod calculus;
pub mod error;
pub mod norms;
pub mod runner;
pub mod space;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
