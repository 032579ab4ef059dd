use super::freq::FrequencyVector;
use super::series::TrigSeries;
use crate::error::{Error, Result};
use crate::formal_expansion::{fixed_point_solve, NonlinearitySpec};
use num_complex::Complex64;

/// Forcing, frequencies, nonlinearity and ε, with the solved constant c₀.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    forcing: TrigSeries,
    freq: FrequencyVector,
    nonlinearity: NonlinearitySpec,
    epsilon: Complex64,
    c0: f64,
}

impl ProblemSpec {
    /// Validates dimensions and solves g(c₀) = f₀ (for the linear model f₀ must vanish).
    pub fn new(
        forcing: TrigSeries,
        freq: FrequencyVector,
        nonlinearity: NonlinearitySpec,
        epsilon: Complex64,
    ) -> Result<Self> {
        if forcing.dim() != freq.dim() {
            return Err(Error::DimensionMismatch { left: forcing.dim(), right: freq.dim() });
        }
        if !(epsilon.re.is_finite() && epsilon.im.is_finite()) {
            return Err(Error::invalid("eps must be finite"));
        }
        let f0 = forcing.zero_mode();
        if f0.im != 0.0 {
            return Err(Error::invalid("zero mode of the forcing must be real"));
        }
        let c0 = if nonlinearity.is_linear() {
            if f0.re != 0.0 {
                return Err(Error::precondition("the linear model needs f0 = 0"));
            }
            0.0
        } else {
            fixed_point_solve(&nonlinearity, f0.re)?
        };
        Ok(ProblemSpec { forcing, freq, nonlinearity, epsilon, c0 })
    }

    /// εẍ + ẋ + εx² = ε(α + β sin ωt).
    pub fn alpha_beta_sin(alpha: f64, beta: f64, omega: f64, eps: f64) -> Result<Self> {
        ProblemSpec::new(
            TrigSeries::alpha_beta_sin(alpha, beta),
            FrequencyVector::periodic(omega),
            NonlinearitySpec::quadratic(),
            Complex64::new(eps, 0.0),
        )
    }

    pub fn forcing(&self) -> &TrigSeries {
        &self.forcing
    }

    pub fn freq(&self) -> &FrequencyVector {
        &self.freq
    }

    pub fn nonlinearity(&self) -> &NonlinearitySpec {
        &self.nonlinearity
    }

    pub fn epsilon(&self) -> Complex64 {
        self.epsilon
    }

    pub fn dim(&self) -> usize {
        self.freq.dim()
    }

    /// The constant c₀ with g(c₀) = f₀.
    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn alpha(&self) -> f64 {
        self.forcing.zero_mode().re
    }

    pub fn with_epsilon(&self, epsilon: Complex64) -> Self {
        ProblemSpec { epsilon, ..self.clone() }
    }

    pub fn with_freq(&self, freq: FrequencyVector) -> Result<Self> {
        if freq.dim() != self.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: freq.dim() });
        }
        Ok(ProblemSpec { freq, ..self.clone() })
    }

    /// True when the solution is real: real forcing and real ε.
    pub fn is_real(&self) -> bool {
        self.forcing.is_real_valued() && self.epsilon.im == 0.0
    }

    /// Largest |ν| in the forcing support.
    pub fn forcing_degree(&self) -> u32 {
        self.forcing.support_radius()
    }
}
