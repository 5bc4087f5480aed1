//! Structured stochastic bandits: asymptotic regret lower bounds, the OSSB
//! algorithm that attains them, baseline policies and a Monte-Carlo harness.

pub mod bound;
pub mod cli;
pub mod config;
pub mod error;
pub mod harness;
pub mod lp;
pub mod observation;
pub mod policy;
pub mod rng;
pub mod selfcheck;
pub mod stats;
pub mod structures;

pub use error::{Error, Result};
