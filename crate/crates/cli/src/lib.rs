//! Scenario files, built-in figure presets and the runner behind the
//! `decolab` command.

pub mod builtins;
pub mod error;
pub mod runner;
pub mod scenario;
pub mod table;
