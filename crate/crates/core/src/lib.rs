//! Bayesian adaptive process tomography of single-qubit polarization channels.

pub mod apparatus;
pub mod bayes;
pub mod channels;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod planner;
pub mod quantum;
pub mod runner;

mod optim;

pub use error::{Error, Result};
