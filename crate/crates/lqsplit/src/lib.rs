//! Problem files, benchmark sweeps and CSV output on top of `lqsplit-core`.

pub mod bench;
pub mod config;
pub mod error;
pub mod output;

pub use error::{Error, Result};
