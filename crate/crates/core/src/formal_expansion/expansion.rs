use crate::fourier_core::{Mode, ProblemSpec, TrigSeries};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionKind {
    Formal,
    Resummed,
}

/// Orders x^(k) (or x^[k]) for k = 0…K together with the constants c_k.
#[derive(Debug, Clone)]
pub struct SeriesExpansion {
    pub orders: Vec<TrigSeries>,
    pub constants: Vec<f64>,
    pub kind: ExpansionKind,
    pub problem: ProblemSpec,
}

impl SeriesExpansion {
    /// Highest computed order K.
    pub fn max_order(&self) -> usize {
        self.orders.len() - 1
    }

    pub fn coeff(&self, k: usize, nu: &Mode) -> num_complex::Complex64 {
        self.orders[k].get(nu)
    }

    /// m_k = max_ν |x^(k)_ν|.
    pub fn order_norms(&self) -> Vec<f64> {
        self.orders.iter().map(|s| s.max_abs()).collect()
    }

    /// Flat rows (k, ν, Re, Im).
    pub fn rows(&self) -> Vec<(usize, Mode, f64, f64)> {
        let mut out = Vec::new();
        for (k, s) in self.orders.iter().enumerate() {
            for (m, c) in s.iter() {
                out.push((k, m.clone(), c.re, c.im));
            }
        }
        out
    }
}
