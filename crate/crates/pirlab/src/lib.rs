//! Std companion: transcripts, JSON reports, capacity CSV, parallel runners and the CLI.

pub mod cli;
pub mod report;
pub mod runner;
pub mod tables;
pub mod transcript;
