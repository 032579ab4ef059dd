use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

type DerivativeFn = dyn Fn(f64, usize) -> f64 + Send + Sync;

#[derive(Clone)]
enum Kind {
    Linear,
    Quadratic,
    /// Σ a_j x^j
    Polynomial(Vec<f64>),
    /// (x, p) ↦ g^{(p)}(x)
    Custom(Arc<DerivativeFn>),
}

/// The nonlinearity g(x), described through its derivatives.
#[derive(Clone)]
pub struct NonlinearitySpec {
    kind: Kind,
    degree: usize,
    description: String,
    search: Option<(f64, f64)>,
}

impl fmt::Debug for NonlinearitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearitySpec")
            .field("description", &self.description)
            .field("degree", &self.degree)
            .field("search", &self.search)
            .finish()
    }
}

impl NonlinearitySpec {
    /// g(x) = x².
    pub fn quadratic() -> Self {
        NonlinearitySpec { kind: Kind::Quadratic, degree: 2, description: "x^2".into(), search: None }
    }

    /// g ≡ 0: the linear model εẍ + ẋ = f.
    pub fn linear() -> Self {
        NonlinearitySpec { kind: Kind::Linear, degree: 0, description: "0".into(), search: None }
    }

    /// g(x) = Σ a_j x^j with `coeffs[j] = a_j`.
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        let mut coeffs = coeffs;
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.len() < 3 {
            return Err(Error::invalid("polynomial nonlinearity needs degree >= 2"));
        }
        let description = coeffs
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != 0.0)
            .map(|(j, a)| format!("{a}*x^{j}"))
            .collect::<Vec<_>>()
            .join(" + ");
        Ok(NonlinearitySpec { degree: coeffs.len() - 1, kind: Kind::Polynomial(coeffs), description, search: None })
    }

    /// Analytic g given by its derivatives, truncated at Taylor degree `degree`.
    pub fn custom<F>(description: &str, degree: usize, derivative: F) -> Result<Self>
    where
        F: Fn(f64, usize) -> f64 + Send + Sync + 'static,
    {
        if degree < 2 {
            return Err(Error::invalid("custom nonlinearity needs truncation degree >= 2"));
        }
        Ok(NonlinearitySpec {
            kind: Kind::Custom(Arc::new(derivative)),
            degree,
            description: description.into(),
            search: None,
        })
    }

    /// Root search interval for the fixed point.
    pub fn with_search_interval(mut self, lo: f64, hi: f64) -> Self {
        self.search = Some((lo, hi));
        self
    }

    pub fn search_interval(&self) -> Option<(f64, f64)> {
        self.search
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.kind, Kind::Linear)
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self.kind, Kind::Quadratic)
    }

    /// g^{(p)}(x).
    pub fn derivative(&self, x: f64, p: usize) -> f64 {
        match &self.kind {
            Kind::Linear => 0.0,
            Kind::Quadratic => match p {
                0 => x * x,
                1 => 2.0 * x,
                2 => 2.0,
                _ => 0.0,
            },
            Kind::Polynomial(a) => {
                let mut sum = 0.0;
                for j in (p..a.len()).rev() {
                    let falling: f64 = ((j - p + 1)..=j).map(|v| v as f64).product();
                    sum = sum * x + a[j] * falling;
                }
                sum
            }
            Kind::Custom(f) => f(x, p),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// Taylor coefficients g_p/p! at `x`, p = 0..=degree.
    pub fn taylor_at(&self, x: f64) -> Vec<f64> {
        let mut fact = 1.0;
        (0..=self.degree)
            .map(|p| {
                if p > 0 {
                    fact *= p as f64;
                }
                self.derivative(x, p) / fact
            })
            .collect()
    }
}
