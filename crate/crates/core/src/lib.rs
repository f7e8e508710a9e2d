//! Merge Resolution (M-Res) for quantified Boolean formulas.
//!
//! - [`qbf`]: formulas, QDIMACS, restriction, brute-force game oracle
//! - [`mergemap`]: hash-consed branching-program strategies
//! - [`calculus`]: proof lines, rules, checker, invariant, extraction, circuits
//! - [`families`]: generators for the benchmark formula families
//! - [`refutations`]: constructive refutation builders

pub mod calculus;
pub mod families;
pub mod mergemap;
pub mod qbf;
pub mod refutations;
pub mod strategy;

pub use strategy::Strategy;
