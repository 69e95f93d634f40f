//! Core library for `lagless`: planning dependency upgrades that minimize
//! technical lag without breaking reachable APIs or introducing redundant
//! dependencies.
//!
//! The crate is `no_std` + `alloc`; all IO, file formats, and the CLI live in
//! the companion `lagless-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod date;
pub mod depth_study;
pub mod graph;
pub mod metrics;
pub mod oracle;
pub mod planner;
pub mod reachability;
pub mod registry;
pub mod semver;
pub mod synth;
pub mod tree;
