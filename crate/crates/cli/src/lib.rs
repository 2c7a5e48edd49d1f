//! Batch front-end for the `induction-sbp` solver.
//!
//! Three experiments are driven from one TOML config: `run` (fields and
//! per-step diagnostics), `converge` (error table against the exact rotation
//! solution) and `stability` (per-step growth factors over a list of step
//! sizes).

pub mod commands;
pub mod config;
pub mod error;

pub use config::RunConfig;
pub use error::CliError;
