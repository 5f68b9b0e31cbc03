//! Disrupted-MDP toolkit: base environments wrapped in a pipeline of
//! observation, reward, cost, action and environment disruptors, baseline
//! agents, and a seeded evaluation harness.

pub mod adversary;
pub mod agents;
#[cfg(feature = "cli")]
pub mod cli;
pub mod disruptors;
pub mod envs;
pub mod error;
pub mod harness;
pub mod mdp;
pub mod rng;

pub use error::ConfigError;
