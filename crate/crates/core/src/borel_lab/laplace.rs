//! (1/ε)∫₀^∞ e^{−s/ε} B(s) ds, computed as ∫₀^∞ e^{−u} B(εu) du.

use crate::error::{Error, Result};
use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use serde::Serialize;
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy)]
pub struct LaplaceOptions {
    /// Growth radius R in |B(s)| ≤ K e^{s/R}; `None` for subexponential growth.
    pub growth_radius: Option<f64>,
    /// Absolute tolerance per quadrature panel.
    pub tol: f64,
    /// Relative cutoff on the damped integrand that fixes s_max.
    pub cutoff: f64,
}

impl Default for LaplaceOptions {
    fn default() -> Self {
        LaplaceOptions { growth_radius: None, tol: 1e-14, cutoff: 1e-16 }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LaplaceValue {
    pub value: Complex64,
    pub quadrature_error: f64,
    pub tail_bound: f64,
    pub s_max: f64,
}

impl LaplaceValue {
    pub fn error(&self) -> f64 {
        self.quadrature_error + self.tail_bound
    }
}

const PANEL: f64 = 4.0;
const U_CAP: f64 = 2000.0;
const MAX_DEPTH: u32 = 12;

fn rules() -> &'static (GaussLegendre, GaussLegendre) {
    static RULES: OnceLock<(GaussLegendre, GaussLegendre)> = OnceLock::new();
    RULES.get_or_init(|| (GaussLegendre::new(40).expect("valid degree"), GaussLegendre::new(30).expect("valid degree")))
}

/// Integral over [a, b] with an error estimate from two Gauss–Legendre orders
/// plus a rounding floor, bisecting until the estimate meets `tol`.
fn panel<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> (Complex64, f64) {
    let (hi, lo) = rules();
    let part = |rule: &GaussLegendre, g: &dyn Fn(f64) -> f64| rule.integrate(a, b, |u| g(u));
    let v_hi = Complex64::new(part(hi, &|u| f(u).re), part(hi, &|u| f(u).im));
    let v_lo = Complex64::new(part(lo, &|u| f(u).re), part(lo, &|u| f(u).im));
    let mass = part(hi, &|u| f(u).norm());
    let err = (v_hi - v_lo).norm() + 8.0 * f64::EPSILON * mass;
    if err <= tol || depth >= MAX_DEPTH {
        return (v_hi, err);
    }
    let mid = 0.5 * (a + b);
    let (l, el) = panel(f, a, mid, tol / 2.0, depth + 1);
    let (r, er) = panel(f, mid, b, tol / 2.0, depth + 1);
    (l + r, el + er)
}

pub fn laplace_sum<F: Fn(f64) -> Complex64>(b: F, eps: f64, opts: &LaplaceOptions) -> Result<LaplaceValue> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::precondition("Laplace sum needs a positive real epsilon"));
    }
    let growth = match opts.growth_radius {
        Some(r) if eps >= r => return Err(Error::LaplaceDomain { eps, radius: r }),
        Some(r) => eps / r,
        None => 0.0,
    };
    let damped = |u: f64| b(eps * u) * (-u).exp();
    // locate s_max on a coarse scan
    let mut peak = 0.0f64;
    let mut k_bound = 0.0f64;
    let mut u_max = U_CAP;
    let mut u = 0.0;
    while u <= U_CAP {
        let bv = b(eps * u);
        if !bv.re.is_finite() || !bv.im.is_finite() {
            return Err(Error::precondition(format!("Borel function not finite at s = {}", eps * u)));
        }
        let v = bv.norm() * (-u).exp();
        peak = peak.max(v);
        k_bound = k_bound.max(bv.norm() * (-growth * u).exp());
        if u > 1.0 && v <= opts.cutoff * peak {
            u_max = u;
            break;
        }
        u += 0.25;
    }
    let panels = (u_max / PANEL).ceil().max(1.0) as usize;
    let width = u_max / panels as f64;
    let mut value = Complex64::new(0.0, 0.0);
    let mut qerr = 0.0;
    for i in 0..panels {
        let (a, z) = (i as f64 * width, (i + 1) as f64 * width);
        let (v, err) = panel(&damped, a, z, opts.tol, 0);
        value += v;
        qerr += err;
    }
    let tail = k_bound * (-(1.0 - growth) * u_max).exp() / (1.0 - growth);
    Ok(LaplaceValue { value, quadrature_error: qerr, tail_bound: tail, s_max: eps * u_max })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_normalized() {
        for eps in [0.01, 0.1, 1.0, 3.0] {
            let v = laplace_sum(|_| Complex64::new(1.0, 0.0), eps, &LaplaceOptions::default()).unwrap();
            assert!((v.value.re - 1.0).abs() < 1e-12 && v.value.im == 0.0);
        }
    }

    #[test]
    fn moments() {
        // (1/ε)∫e^{−s/ε} s^k/k! ds = ε^k
        let eps = 0.2;
        let v = laplace_sum(|s| Complex64::new(s * s * s / 6.0, 0.0), eps, &LaplaceOptions::default()).unwrap();
        assert!((v.value.re - eps.powi(3)).abs() < 1e-14);
    }

    #[test]
    fn domain_error() {
        let opts = LaplaceOptions { growth_radius: Some(0.5), ..Default::default() };
        assert!(matches!(laplace_sum(|_| Complex64::new(1.0, 0.0), 0.6, &opts), Err(Error::LaplaceDomain { .. })));
        assert!(laplace_sum(|s| Complex64::new((2.0 * s).exp(), 0.0), 0.1, &opts).is_ok());
    }
}
