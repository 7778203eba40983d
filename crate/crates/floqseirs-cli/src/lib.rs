//! Library surface of the `floqseirs` command-line tool: configuration
//! loading and the command implementations, kept separate from the binary so
//! integration tests can drive them directly.

pub mod commands;
pub mod config;

pub use commands::{PersistOptions, PersistenceVerdict, SweepOptions, Verdict};
pub use config::{AppError, IncidenceConfig, InitialConditions, RunConfig};
