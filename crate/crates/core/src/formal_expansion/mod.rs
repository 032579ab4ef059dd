//! Formal power series x = Σ εᵏ x^(k) and its diagnostics.

mod expansion;
mod fixed_point;
mod growth;
mod nonlinearity;
mod recursion;

pub use expansion::{ExpansionKind, SeriesExpansion};
pub use fixed_point::fixed_point_solve;
pub use growth::{growth_diagnostic, support_check, GrowthFit, GrowthModel, GrowthReport, SupportReport, SupportRow};
pub use nonlinearity::NonlinearitySpec;
pub use recursion::{formal_orders, formal_via_taylor, support_bound};
pub(crate) use recursion::certify;
