//! Batch plumbing: a config file selects an engine and its inputs, a run
//! writes a trace, and verification replays a trace by its engine tag.

pub mod config;
pub mod run;
pub mod verify;

pub use config::{resolve, EngineKind, RunConfig, FIXTURES_ENV};
pub use run::{run, RunOutput};
pub use verify::{verify, VerifyReport};
