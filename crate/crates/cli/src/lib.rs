//! Configuration-driven experiments over the `paracone` checkers.

pub mod checks;
pub mod config;
pub mod manifest;
pub mod output;
