//! Patient-level ovarian cancer treatment simulator.
//!
//! Clinical and drug-line tables are reorganized into monthly treatment
//! periods ([`data_pipeline`]), two Cox regressions are fitted on them
//! ([`survival`]), and those regressions drive a stochastic Markov decision
//! process ([`mdp_env`]) in which agents ([`agents`]) pick a drug combination
//! each month. [`trainer`] runs the round loop and [`analysis`] produces the
//! statistical comparisons.

pub mod agents;
pub mod analysis;
pub mod data_pipeline;
pub mod error;
pub mod mdp_env;
pub mod neural;
pub mod rng;
pub mod survival;
pub mod synth;
pub mod trainer;

pub use error::{Error, Result};
