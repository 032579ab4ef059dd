//! Resummed μ-series with ε-dressed propagators.

mod engine;

pub use engine::{run_engine, EngineOutput, LineFactors};

use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::fourier_core::sparse::SparseMap;
use crate::fourier_core::{convolve_terms, small_divisor, Coeff, FrequencyVector, Mode, ProblemSpec, TrigSeries};
use crate::formal_expansion::{ExpansionKind, SeriesExpansion};
use crate::jet::EpsJet;
use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const POLE_TOLERANCE: f64 = 1e-30;

/// 1/(iω·ν(1+iεω·ν)) for ν ≠ 0, and 1 at ν = 0.
pub fn dressed_propagator(nu: &Mode, eps: Complex64, freq: &FrequencyVector) -> Result<Complex64> {
    if nu.is_zero() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let x = small_divisor(freq, nu);
    if x == 0.0 {
        return Err(Error::Resonance { mode: nu.components().to_vec() });
    }
    let dress = Complex64::new(1.0, 0.0) + I * eps * x;
    if dress.norm() < POLE_TOLERANCE {
        return Err(Error::PropagatorPole { mode: nu.components().to_vec(), magnitude: dress.norm() });
    }
    Ok((I * x * dress).inv())
}

fn to_expansion(spec: &ProblemSpec, out: EngineOutput<Complex64>) -> SeriesExpansion {
    let real = spec.is_real();
    let orders = out
        .orders
        .into_iter()
        .map(|m| TrigSeries::from_map_unchecked(spec.dim(), m, real))
        .collect();
    let constants = out.constants.iter().map(|c| c.re).collect();
    SeriesExpansion { orders, constants, kind: ExpansionKind::Resummed, problem: spec.clone() }
}

/// Coefficients x^[k] of the μ-expansion at the problem's ε, k = 0…K.
///
/// For complex ε the zero modes are complex; `constants` then keeps their real parts.
pub fn resummed_orders(spec: &ProblemSpec, k_max: usize) -> Result<SeriesExpansion> {
    let eps = spec.epsilon();
    let freq = spec.freq().clone();
    let out = run_engine(spec, k_max, eps, |nu| {
        Ok(LineFactors { propagator: dressed_propagator(nu, eps, &freq)?, counterterm: None })
    })?;
    Ok(to_expansion(spec, out))
}

/// The resummed recursion run on truncated power series in ε.
///
/// Entry (k, ν) holds the ε-Taylor coefficients of x^[k]_ν through ε^{N−1};
/// summing over k and reading coefficient j recovers the formal x^(j)_ν.
pub fn resummed_eps_jets<const N: usize>(spec: &ProblemSpec, k_max: usize) -> Result<Vec<SparseMap<EpsJet<N>>>> {
    let eps = EpsJet::<N>::variable();
    let freq = spec.freq().clone();
    let out = run_engine(spec, k_max, eps, |nu| {
        let x = small_divisor(&freq, nu);
        if x == 0.0 {
            return Err(Error::Resonance { mode: nu.components().to_vec() });
        }
        let d = EpsJet::<N>::constant(I * x) + eps.scale(Complex64::new(-x * x, 0.0));
        Ok(LineFactors { propagator: d.recip(), counterterm: None })
    })?;
    Ok(out.orders)
}

/// Collects ε-jets of the μ-orders into ε-orders: result[j](ν) = Σ_k coeff_j(x^[k]_ν).
pub fn collect_eps_orders<const N: usize>(dim: usize, jets: &[SparseMap<EpsJet<N>>]) -> Vec<TrigSeries> {
    let mut maps: Vec<BTreeMap<Mode, Complex64>> = vec![BTreeMap::new(); N];
    for order in jets {
        for (m, jet) in order {
            for (j, map) in maps.iter_mut().enumerate() {
                let c = jet.coeff(j);
                if c != Complex64::new(0.0, 0.0) {
                    *map.entry(m.clone()).or_default() += c;
                }
            }
        }
    }
    maps.into_iter().map(|m| TrigSeries::from_map_unchecked(dim, m, false)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma4Report {
    pub eps_re: f64,
    pub eps_im: f64,
    pub nu_max: u32,
    /// min over 0 < |ν| ≤ nu_max of |iων(1+iεων)|.
    pub minimum: f64,
    pub argmin: i32,
    pub bound: f64,
    pub margin: f64,
    pub pass: bool,
}

/// Checks |iων(1+iεων)| ≥ ω/2 over 0 < |ν| ≤ `nu_max` (d = 1).
pub fn lemma4_domain_check(eps: Complex64, freq: &FrequencyVector, nu_max: u32) -> Result<Lemma4Report> {
    if freq.dim() != 1 {
        return Err(Error::precondition("the propagator domain check is for d = 1"));
    }
    let omega = freq.omega()[0];
    let mut minimum = f64::INFINITY;
    let mut argmin = 0;
    for n in 1..=nu_max as i32 {
        for nu in [n, -n] {
            let x = omega * nu as f64;
            let v = (I * x * (Complex64::new(1.0, 0.0) + I * eps * x)).norm();
            if v < minimum {
                minimum = v;
                argmin = nu;
            }
        }
    }
    let bound = omega.abs() / 2.0;
    Ok(Lemma4Report {
        eps_re: eps.re,
        eps_im: eps.im,
        nu_max,
        minimum,
        argmin,
        bound,
        margin: minimum - bound,
        pass: minimum >= bound,
    })
}

/// Σ_{k ≤ K} μᵏ x^[k] as a single series.
pub fn partial_sum(e: &SeriesExpansion, k_max: usize, mu: f64) -> TrigSeries {
    let mut acc = TrigSeries::zero(e.problem.dim());
    let mut w = 1.0;
    for s in e.orders.iter().take(k_max + 1) {
        acc = acc.add(&s.scale(Complex64::new(w, 0.0))).expect("orders share the dimension");
        w *= mu;
    }
    acc
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolutionValue {
    pub value: f64,
    pub error_estimate: f64,
}

/// Ratio estimate of the ℓ¹ order norms over the last few orders.
pub fn decay_ratio(e: &SeriesExpansion) -> f64 {
    let norms: Vec<f64> = e.orders.iter().map(|s| s.l1_mass()).collect();
    let k = norms.len() - 1;
    let lo = k.saturating_sub(3).max(1);
    let pts: Vec<(usize, f64)> = (lo..=k).filter(|&j| norms[j] > 0.0).map(|j| (j, norms[j])).collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let design: Vec<Vec<f64>> = pts.iter().map(|(j, _)| vec![1.0, *j as f64]).collect();
    let y: Vec<f64> = pts.iter().map(|(_, v)| v.ln()).collect();
    least_squares(&design, &y).0[1].exp()
}

/// Root-test estimate of the μ-radius of convergence.
pub fn mu_radius_estimate(e: &SeriesExpansion) -> f64 {
    let r = decay_ratio(e);
    if r == 0.0 {
        f64::INFINITY
    } else {
        1.0 / r
    }
}

/// x(t) = Σ μᵏ x^[k](t) with a geometric tail estimate.
pub fn evaluate_solution(e: &SeriesExpansion, t: f64, mu: f64) -> Result<SolutionValue> {
    let ratio = decay_ratio(e) * mu.abs();
    if ratio >= 1.0 {
        return Err(Error::Divergence { ratio });
    }
    let k = e.max_order();
    let value = partial_sum(e, k, mu).evaluate_real(e.problem.freq(), t);
    let last = e.orders[k].l1_mass() * mu.abs().powi(k as i32);
    Ok(SolutionValue { value, error_estimate: last * ratio / (1.0 - ratio) })
}

/// Closed-form periodic solution of εẍ + ẋ = f(ωt), f₀ = 0.
pub fn linear_exact(spec: &ProblemSpec) -> Result<TrigSeries> {
    if !spec.nonlinearity().is_linear() {
        return Err(Error::precondition("linear_exact needs the nonlinearity disabled"));
    }
    if spec.forcing().zero_mode() != Complex64::new(0.0, 0.0) {
        return Err(Error::precondition("linear_exact needs f0 = 0"));
    }
    let eps = spec.epsilon();
    let mut pairs = Vec::new();
    for (nu, f) in spec.forcing().iter() {
        pairs.push((nu.clone(), f * dressed_propagator(nu, eps, spec.freq())?));
    }
    let mut map = BTreeMap::new();
    for (m, c) in pairs {
        map.insert(m, c);
    }
    Ok(TrigSeries::from_map_unchecked(spec.dim(), map, spec.is_real()))
}

/// [g(x)]_ν via the Taylor expansion of g around c₀ (exact for polynomials).
pub fn nonlinear_term(x: &TrigSeries, spec: &ProblemSpec) -> Result<TrigSeries> {
    let g = spec.nonlinearity();
    let dim = spec.dim();
    if g.is_linear() {
        return Ok(TrigSeries::zero(dim));
    }
    let c0 = spec.c0();
    let taylor = g.taylor_at(c0);
    let mut y: BTreeMap<Mode, Complex64> = x.iter().map(|(m, c)| (m.clone(), *c)).collect();
    *y.entry(Mode::zero(dim)).or_default() -= c0;
    let y: Vec<(Mode, Complex64)> = y.into_iter().filter(|(_, c)| *c != Complex64::new(0.0, 0.0)).collect();
    let mut acc: BTreeMap<Mode, Complex64> = BTreeMap::new();
    *acc.entry(Mode::zero(dim)).or_default() += taylor[0];
    let mut power = y.clone();
    for (p, coef) in taylor.iter().enumerate().skip(1) {
        if p > 1 {
            power = convolve_terms(dim, &power, &y);
        }
        for (m, c) in &power {
            *acc.entry(m.clone()).or_default() += c * coef;
        }
    }
    TrigSeries::from_pairs(dim, acc)
}

/// max_ν |ε(iω·ν)²x_ν + iω·ν x_ν + ε[g(x)]_ν − εf_ν|, zero mode included.
/// The linear model uses |ε(iω·ν)²x_ν + iω·ν x_ν − f_ν|.
pub fn residual(x: &TrigSeries, spec: &ProblemSpec) -> Result<f64> {
    let eps = spec.epsilon();
    let linear = spec.nonlinearity().is_linear();
    let gx = nonlinear_term(x, spec)?;
    let mut modes: Vec<Mode> = x.iter().map(|(m, _)| m.clone()).collect();
    modes.extend(spec.forcing().iter().map(|(m, _)| m.clone()));
    modes.extend(gx.iter().map(|(m, _)| m.clone()));
    modes.sort();
    modes.dedup();
    let mut worst: f64 = 0.0;
    for nu in modes {
        let iw = I * small_divisor(spec.freq(), &nu);
        let xv = x.get(&nu);
        let mut r = eps * iw * iw * xv + iw * xv;
        if linear {
            r -= spec.forcing().get(&nu);
        } else {
            r += eps * (gx.get(&nu) - spec.forcing().get(&nu));
        }
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct Eps3Estimate {
    pub eps3: f64,
    pub amplitude: f64,
    pub xi: f64,
    pub b2: f64,
    /// False when ξ could not be fitted from at least two mode shells.
    pub confident: bool,
}

/// ε₃ = (4|ω|⁻¹ max{1, 1/2c₀} max{F B₂, c₀})⁻¹ with B₂ = 2e^{−ξ/2}(1 − e^{−ξ/2})⁻¹.
///
/// F and ξ come from the forcing's decay envelope when present, otherwise from
/// a least-squares fit of ln|f_ν| against |ν|.
pub fn epsilon_3(spec: &ProblemSpec) -> Eps3Estimate {
    let (amplitude, xi, confident) = match spec.forcing().decay() {
        Some(d) => (d.amplitude, d.xi, true),
        None => fit_decay(spec.forcing()),
    };
    let b2 = 2.0 * (-xi / 2.0).exp() / (1.0 - (-xi / 2.0).exp());
    let omega = spec.freq().omega().iter().map(|w| w * w).sum::<f64>().sqrt();
    let c0 = spec.c0();
    let inv = 4.0 / omega * 1f64.max(1.0 / (2.0 * c0)) * (amplitude * b2).max(c0);
    Eps3Estimate { eps3: 1.0 / inv, amplitude, xi, b2, confident }
}

fn fit_decay(f: &TrigSeries) -> (f64, f64, bool) {
    let pts: Vec<(f64, f64)> = f
        .iter()
        .filter(|(m, c)| !m.is_zero() && c.norm() > 0.0)
        .map(|(m, c)| (m.l1() as f64, c.norm().ln()))
        .collect();
    let mut shells: Vec<f64> = pts.iter().map(|p| p.0).collect();
    shells.sort_by(f64::total_cmp);
    shells.dedup();
    if shells.len() < 2 {
        let amp = pts.iter().map(|(n, l)| (l + n).exp()).fold(0.0, f64::max);
        return (amp.max(f64::MIN_POSITIVE), 1.0, false);
    }
    let design: Vec<Vec<f64>> = pts.iter().map(|(n, _)| vec![1.0, *n]).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (c, _) = least_squares(&design, &y);
    let xi = (-c[1]).max(1e-3);
    // smallest F making the envelope cover every coefficient
    let amp = pts.iter().map(|(n, l)| (l + xi * n).exp()).fold(0.0, f64::max);
    (amp, xi, true)
}
