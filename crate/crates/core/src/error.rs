use serde::Serialize;

/// Numerical-domain failures raised by the library.
///
/// Every variant serializes to JSON with a `kind` tag so the CLI can emit it verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, thiserror::Error)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("exact resonance: omega . nu = 0 at nu = {mode:?}")]
    Resonance { mode: Vec<i32> },

    #[error("support budget {budget} exceeded: pruning would drop mass {pruned:e} of {total:e}")]
    BudgetExceeded { budget: u32, pruned: f64, total: f64 },

    #[error("no root of g(x) = {f0} with g'(x) != 0 in [{lo}, {hi}]")]
    NoRoot { f0: f64, lo: f64, hi: f64 },

    #[error("degenerate root at x = {x}: g(x) = f0 but g'(x) = {derivative:e}, the non-degeneracy condition g'(c0) != 0 fails")]
    DegenerateRoot { x: f64, derivative: f64 },

    #[error("invalid problem: {reason}")]
    InvalidProblem { reason: String },

    #[error("propagator pole at nu = {mode:?}: |1 + i eps omega.nu| = {magnitude:e}")]
    PropagatorPole { mode: Vec<i32>, magnitude: f64 },

    #[error("orders do not decay: ratio estimate {ratio}")]
    Divergence { ratio: f64 },

    #[error("Pade [{l}/{m}] degenerate: pivot {pivot:e} below {threshold:e}; retry with smaller M or extended precision")]
    PadeDegenerate { l: usize, m: usize, pivot: f64, threshold: f64 },

    #[error("Pade pole on the integration path at s = {re} + {im}i with residue {residue:e}")]
    PoleOnPath { re: f64, im: f64, residue: f64 },

    #[error("Laplace integral not damped: eps = {eps} >= Borel radius {radius}")]
    LaplaceDomain { eps: f64, radius: f64 },

    #[error("tree budget exceeded after {count} trees")]
    TreeBudget { count: usize },

    #[error("trajectory escaped at t = {t} (|state| = {norm:e})")]
    Escape { t: f64, norm: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("Newton failed after {iterations} iterations (residual {residual:e}); try a smaller eps")]
    NewtonFailed { iterations: usize, residual: f64 },

    #[error("scale assignment needs x != 0")]
    ZeroMomentum,

    #[error("renormalized propagator singular at x = {x}, eps = {eps_re} + {eps_im}i, scale {scale}")]
    SingularPropagator { x: f64, eps_re: f64, eps_im: f64, scale: u32 },

    #[error("precondition violated: {reason}")]
    Precondition { reason: String },
}

impl Error {
    pub(crate) fn precondition(reason: impl Into<String>) -> Self {
        Error::Precondition { reason: reason.into() }
    }

    pub(crate) fn invalid(reason: impl Into<String>) -> Self {
        Error::InvalidProblem { reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
