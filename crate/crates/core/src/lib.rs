//! Simulation and statistical analysis of spin-polarization correlation
//! experiments: singlet, smeared, local hidden-variable and contextual pair
//! models; coincidence counting; CHSH estimation; and a battery of purity and
//! randomness tests for outcome time series.

pub mod cli;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod models;
pub mod rng;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
