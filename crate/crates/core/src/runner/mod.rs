//! Config-driven scenario runner.

mod config;
mod scenarios;

pub use config::*;
pub use scenarios::*;
