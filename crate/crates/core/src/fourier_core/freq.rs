use super::mode::{modes_within, Mode};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// (√5 − 1)/2.
pub const GOLDEN_MEAN: f64 = 0.618_033_988_749_894_9;

/// Frequency vector ω with Diophantine constants (C₀, τ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyVector {
    omega: Vec<f64>,
    c0: f64,
    tau: f64,
}

impl FrequencyVector {
    pub fn new(omega: Vec<f64>, c0: f64, tau: f64) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::invalid("frequency vector needs d >= 1"));
        }
        if omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("frequency components must be finite"));
        }
        if !(c0 > 0.0) {
            return Err(Error::invalid("Diophantine constant C0 must be positive"));
        }
        if tau < 0.0 || (omega.len() >= 2 && tau < (omega.len() - 1) as f64) {
            return Err(Error::invalid(format!("tau = {tau} too small for d = {}", omega.len())));
        }
        Ok(FrequencyVector { omega, c0, tau })
    }

    /// d = 1, τ = 0, C₀ = |ω|.
    pub fn periodic(omega: f64) -> Self {
        FrequencyVector { omega: vec![omega], c0: omega.abs(), tau: 0.0 }
    }

    /// ω = (1, γ₀) with τ = 1 and C₀ certified by a scan to |ν| ≤ `radius`.
    pub fn golden(radius: u32) -> Self {
        let provisional = FrequencyVector { omega: vec![1.0, GOLDEN_MEAN], c0: 1.0, tau: 1.0 };
        let (c0, _) = diophantine_scan(&provisional, radius).expect("golden mean is non-resonant");
        FrequencyVector { c0, ..provisional }
    }

    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn with_c0(mut self, c0: f64) -> Result<Self> {
        if !(c0 > 0.0) {
            return Err(Error::invalid("Diophantine constant C0 must be positive"));
        }
        self.c0 = c0;
        Ok(self)
    }
}

/// ω·ν.
pub fn small_divisor(freq: &FrequencyVector, nu: &Mode) -> f64 {
    nu.dot(freq.omega())
}

/// min over 0 < |ν| ≤ N of |ω·ν|·|ν|^τ, with the minimizing mode.
pub fn diophantine_scan(freq: &FrequencyVector, n: u32) -> Result<(f64, Mode)> {
    if n == 0 {
        return Err(Error::precondition("diophantine_scan needs N >= 1"));
    }
    let mut best = f64::INFINITY;
    let mut worst = Mode::zero(freq.dim());
    for nu in modes_within(freq.dim(), n) {
        if !nu.is_canonical() {
            continue;
        }
        let x = small_divisor(freq, &nu).abs();
        if x == 0.0 {
            return Err(Error::Resonance { mode: nu.components().to_vec() });
        }
        let value = x * (nu.l1() as f64).powf(freq.tau());
        if value < best {
            best = value;
            worst = nu;
        }
    }
    Ok((best, worst))
}
