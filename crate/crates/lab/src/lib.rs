//! Configuration, file formats and orchestration for running
//! `cocycle-core` experiments from the command line.

pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;
pub mod serial;

pub use error::{LabError, LabResult};
