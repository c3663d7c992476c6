//! Command line driver for morphreg: synthetic problems, registration runs
//! written as bundles, rendering, metrics and the HTTP result server.

pub mod bundle;
pub mod commands;
pub mod config;
pub mod error;
pub mod metrics;
pub mod problem;
pub mod render;
pub mod server;

pub use error::{CliError, Result};
