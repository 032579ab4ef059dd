//! Perturbation theory for the strongly damped forced oscillator
//! `εẍ + ẋ + εg(x) = εf(ωt)`.

pub mod borel_lab;
pub mod cli;
pub mod error;
pub mod fit;
pub mod formal_expansion;
pub mod fourier_core;
pub mod jet;
pub mod multiscale_rg;
pub mod ode_oracle;
pub mod resummation;
pub mod tree_engine;

pub use error::{Error, Result};
