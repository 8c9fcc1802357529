//! Simulation lab for the contact process on finite graphs.
//!
//! The crate is organised around the graphical construction: a [`randomness::EventLog`]
//! holds Poisson recovery and transmission clocks sampled at a reference rate, and every
//! infection rate up to that reference can be realised from the same log by thinning.
//! On top of that sit a direct Gillespie simulator and a log-replay simulator
//! ([`simulate`]), an exact CTMC oracle for small graphs ([`exact`]), and Monte Carlo
//! experiments that check analytic survival/extinction bounds ([`experiments`]).
//!
//! The `contact-lab` binary exposes the whole pipeline behind a small config-file CLI
//! ([`cli`]).

pub mod cli;
pub mod config;
pub mod exact;
pub mod experiments;
pub mod graphs;
pub mod randomness;
pub mod report;
pub mod simulate;
pub mod svg;
