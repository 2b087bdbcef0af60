//! File formats and the command-line front-end for `qramforge-core`.
//!
//! - [`document`]: JSON circuit documents (`qramforge-circuit/1`).
//! - [`state`]: JSON state files.
//! - [`report`]: verification reports as JSON and text.
//! - [`qasm`]: OpenQASM 2.0 output.
//! - [`analysis`]: resource tables and CSV.
//! - [`cli`]: the `qramforge` binary.

pub mod analysis;
pub mod cli;
pub mod document;
pub mod error;
pub mod instance;
pub mod qasm;
pub mod report;
pub mod state;

pub use error::{Error, Result};
pub use qramforge_core as core;
