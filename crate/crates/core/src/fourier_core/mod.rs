//! Sparse trigonometric series and frequency utilities.

mod coeff;
mod freq;
mod mode;
mod problem;
mod series;
pub(crate) mod sparse;
pub mod text;

pub use coeff::Coeff;
pub use freq::{diophantine_scan, small_divisor, FrequencyVector, GOLDEN_MEAN};
pub use mode::{modes_within, Mode};
pub use problem::ProblemSpec;
pub use series::{convolve_terms, DecayEnvelope, TrigSeries, PRUNE_TOLERANCE};
