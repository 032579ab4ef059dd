//! Scale decomposition of the small divisors, renormalized propagators with
//! counterterms, and the quasi-periodic resummed series.

mod audit;

pub use audit::{
    bound_lemma_audit, fibonacci_scales, line_count_audit, AuditGrid, AuditPoint, BoundAuditReport, FibonacciRow, LineCountReport, LemmaAudit,
    SharpnessProbe,
};

use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::formal_expansion::{ExpansionKind, SeriesExpansion};
use crate::fourier_core::sparse::SparseMap;
use crate::fourier_core::{diophantine_scan, small_divisor, Coeff, ProblemSpec, TrigSeries};
use crate::jet::EpsJet;
use crate::resummation::{run_engine, LineFactors};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const SINGULAR: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffStyle {
    Sharp,
    Smooth,
}

/// Dyadic partition of |x| relative to C₀.
///
/// χ_n is 1 for |x| below 2^{−(n+1)}C₀ and vanishes from 2^{−n}C₀ on; ψ_n = 1 − χ_n.
/// Scale n carries the weight χ_{n−1}ψ_n, with χ_{−1} ≡ 1.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalePartition {
    pub c0: f64,
    pub style: CutoffStyle,
    pub n_max: u32,
}

fn bump(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Smooth step: 1 for y ≤ 1, 0 for y ≥ 2.
fn smooth_step(y: f64) -> f64 {
    let a = bump(2.0 - y);
    let b = bump(y - 1.0);
    a / (a + b)
}

impl ScalePartition {
    pub fn new(c0: f64, style: CutoffStyle, n_max: u32) -> Result<Self> {
        if !(c0 > 0.0) || !c0.is_finite() {
            return Err(Error::invalid("partition constant C0 must be positive"));
        }
        Ok(ScalePartition { c0, style, n_max })
    }

    /// C₀ = 0.999·min(Diophantine constant, γ/2) with γ = min(1, |g'(c₀)|).
    pub fn certified(spec: &ProblemSpec, style: CutoffStyle, scan_radius: u32) -> Result<Self> {
        let (dioph, _) = diophantine_scan(spec.freq(), scan_radius)?;
        let gamma = gamma_of(spec);
        Self::new(0.999 * dioph.min(spec.freq().c0()).min(gamma / 2.0), style, 64)
    }

    pub fn chi(&self, n: i64, x: f64) -> f64 {
        if n < 0 {
            return 1.0;
        }
        let y = x.abs() * 2f64.powi(n as i32 + 1) / self.c0;
        match self.style {
            CutoffStyle::Sharp => {
                if y < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            CutoffStyle::Smooth => smooth_step(y),
        }
    }

    pub fn psi(&self, n: i64, x: f64) -> f64 {
        1.0 - self.chi(n, x)
    }

    /// χ₀⋯χ_{n−1}ψ_n, which equals χ_{n−1}ψ_n by nesting.
    pub fn weight(&self, n: u32, x: f64) -> f64 {
        self.chi(n as i64 - 1, x) * self.psi(n as i64, x)
    }

    /// Nonzero scale weights of x.
    pub fn weights(&self, x: f64) -> Vec<(u32, f64)> {
        let n = sharp_scale(x, self.c0);
        let lo = n.saturating_sub(1);
        (lo..=n + 1).map(|m| (m, self.weight(m, x))).filter(|(_, w)| *w != 0.0).collect()
    }
}

fn sharp_scale(x: f64, c0: f64) -> u32 {
    let r = x.abs() / c0;
    if r >= 0.5 {
        return 0;
    }
    let mut n = (-r.log2()).floor() as i64 - 1;
    // guard the floor against rounding at the dyadic boundaries
    while n > 0 && r >= 2f64.powi(-(n as i32)) {
        n -= 1;
    }
    while r < 2f64.powi(-(n as i32 + 1)) {
        n += 1;
    }
    n.max(0) as u32
}

/// The unique n ≥ 0 with 2^{−(n+1)}C₀ ≤ |x| < 2^{−n}C₀ (n = 0 for |x| ≥ C₀/2).
pub fn assign_scale(x: f64, part: &ScalePartition) -> Result<u32> {
    if x == 0.0 || !x.is_finite() {
        return Err(Error::precondition("zero-momentum lines carry no scale"));
    }
    Ok(sharp_scale(x, part.c0))
}

/// g'(c₀), the linearization constant (2c₀ for the quadratic).
pub fn linear_constant(spec: &ProblemSpec) -> f64 {
    spec.nonlinearity().derivative(spec.c0(), 1)
}

pub(crate) fn gamma_of(spec: &ProblemSpec) -> f64 {
    linear_constant(spec).abs().min(1.0)
}

/// Per-scale data entering the order-3 self-energy: (x', |f_ν'|²/c₀, weight).
fn self_energy_terms(spec: &ProblemSpec, part: &ScalePartition) -> Vec<Vec<(f64, f64)>> {
    let mut per: Vec<Vec<(f64, f64)>> = vec![Vec::new(); part.n_max as usize + 1];
    for (nu, f) in spec.forcing().iter() {
        if nu.is_zero() {
            continue;
        }
        let x = small_divisor(spec.freq(), nu);
        if x == 0.0 {
            continue;
        }
        for (n, w) in part.weights(x) {
            if (n as usize) < per.len() {
                per[n as usize].push((x, w * f.norm_sqr() / spec.c0()));
            }
        }
    }
    per
}

/// Counterterm values over a generic coefficient field:
/// the order-1 term −ε g'(c₀) and, for K_M = 3, the per-scale order-3 sums
/// (ε³/c₀) Σ_{ν' on scale n} |f_ν'|² / (x'²(1 + ε²x'²)).
fn counterterm_values<T: Coeff>(spec: &ProblemSpec, part: &ScalePartition, eps: T, k_m: u32) -> (T, Vec<T>) {
    let leading = eps.scale(Complex64::new(-linear_constant(spec), 0.0));
    let per = self_energy_terms(spec, part);
    let values = per
        .iter()
        .map(|terms| {
            if k_m < 3 {
                return T::zero();
            }
            let mut acc = T::zero();
            let e2 = eps * eps;
            for (x, a) in terms {
                let denom = T::from_re(x * x) + e2.scale(Complex64::new(x * x * x * x, 0.0));
                acc += denom.recip().scale(Complex64::new(*a, 0.0));
            }
            acc * e2 * eps
        })
        .collect();
    (leading, values)
}

#[derive(Debug, Clone, Serialize)]
pub struct CountertermSample {
    pub n: u32,
    pub x: f64,
    pub m: Complex64,
    pub dm: Complex64,
}

/// Counterterms of the renormalized propagators, truncated at self-energy order K_M.
#[derive(Debug, Clone, Serialize)]
pub struct CountertermTable {
    pub eps: Complex64,
    pub k_m: u32,
    /// −ε g'(c₀).
    pub leading: Complex64,
    /// Order-3 contribution of each scale.
    pub per_scale: Vec<Complex64>,
    pub samples: Vec<CountertermSample>,
}

impl CountertermTable {
    /// M^[n](0;ε): the leading term sits on scale 0.
    pub fn scale_value(&self, n: u32) -> Complex64 {
        let base = if n == 0 { self.leading } else { Complex64::new(0.0, 0.0) };
        base + self.per_scale.get(n as usize).copied().unwrap_or_default()
    }

    /// Σ_{n' < n} M^[n'], the counterterm in the denominator of scale n
    /// (the leading term is always present).
    pub fn cumulative(&self, n: u32) -> Complex64 {
        self.leading + self.per_scale.iter().take(n as usize).sum::<Complex64>()
    }

    /// The renormalized constant c₁(ε)/ε, equal to g'(c₀) at leading order.
    pub fn linear_coefficient(&self) -> Complex64 {
        -self.leading / self.eps
    }
}

pub fn counterterms(spec: &ProblemSpec, part: &ScalePartition, k_m: u32) -> Result<CountertermTable> {
    if !(k_m == 1 || k_m == 3) {
        return Err(Error::precondition(format!("self-energy truncation K_M = {k_m} not supported (1 or 3)")));
    }
    if k_m == 3 && !spec.nonlinearity().is_quadratic() {
        return Err(Error::precondition("order-3 self-energy sums are implemented for the quadratic nonlinearity"));
    }
    if spec.dim() >= 2 {
        let (dioph, worst) = diophantine_scan(spec.freq(), spec.forcing_degree().max(1) * 4)?;
        if part.c0 > dioph {
            return Err(Error::precondition(format!(
                "partition C0 = {} exceeds the Diophantine constant {dioph} found by diophantine_scan at mode {worst}",
                part.c0
            )));
        }
    }
    let eps = spec.epsilon();
    let (leading, per_scale) = counterterm_values(spec, part, eps, k_m);
    let per = self_energy_terms(spec, part);
    let mut samples = Vec::new();
    for (n, terms) in per.iter().enumerate() {
        for (x, _) in terms {
            if *x > 0.0 {
                // x-independent at this truncation: M(x) = M(0), ∂ₓM = 0
                let value = if n == 0 { leading } else { Complex64::new(0.0, 0.0) } + per_scale[n];
                samples.push(CountertermSample { n: n as u32, x: *x, m: value, dm: Complex64::new(0.0, 0.0) });
            }
        }
    }
    Ok(CountertermTable { eps, k_m, leading, per_scale, samples })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScaleDecayFit {
    pub d1: f64,
    pub d2: f64,
    pub rss: f64,
    pub points: usize,
}

/// Fits |M^[n](0;ε)| = D₁|ε|³ e^{−D₂ 2^{n/τ}} over the nonzero scales n ≥ 1.
pub fn fit_scale_decay(table: &CountertermTable, tau: f64) -> Option<ScaleDecayFit> {
    let eps3 = table.eps.norm().powi(3);
    let pts: Vec<(f64, f64)> = (1..table.per_scale.len() as u32)
        .map(|n| (2f64.powf(n as f64 / tau), table.scale_value(n).norm()))
        .filter(|(_, m)| *m > 0.0)
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let rows: Vec<Vec<f64>> = pts.iter().map(|(s, _)| vec![1.0, -s]).collect();
    let y: Vec<f64> = pts.iter().map(|(_, m)| (m / eps3).ln()).collect();
    let (c, rss) = least_squares(&rows, &y);
    Some(ScaleDecayFit { d1: c[0].exp(), d2: c[1], rss, points: pts.len() })
}

fn dressed_denominator<T: Coeff>(eps: T, x: f64) -> T {
    T::from_c64(I * x) + eps.scale(Complex64::new(-x * x, 0.0))
}

/// g^[n](x;ε) = Σ_n χ_{n−1}ψ_n / (ix(1+iεx) − Σ_{n'<n} M^[n']).
pub fn renormalized_propagator(x: f64, eps: Complex64, table: &CountertermTable, part: &ScalePartition) -> Result<Complex64> {
    let n0 = assign_scale(x, part)?;
    let d = dressed_denominator(eps, x);
    let mut g = Complex64::new(0.0, 0.0);
    for (n, w) in part.weights(x) {
        let den = d - table.cumulative(n);
        if den.norm() < SINGULAR {
            return Err(Error::SingularPropagator { x, eps_re: eps.re, eps_im: eps.im, scale: n });
        }
        g += w / den;
    }
    if g.norm() == 0.0 {
        return Err(Error::SingularPropagator { x, eps_re: eps.re, eps_im: eps.im, scale: n0 });
    }
    Ok(g)
}

fn line_factors<T: Coeff>(x: f64, eps: T, leading: T, per_scale: &[T], part: &ScalePartition) -> LineFactors<T> {
    let d = dressed_denominator(eps, x);
    let weights = part.weights(x);
    let cumulative = |n: u32| -> T {
        let mut acc = leading;
        for v in per_scale.iter().take(n as usize) {
            acc += *v;
        }
        acc
    };
    if weights.len() == 1 && weights[0].1 == 1.0 {
        let m = cumulative(weights[0].0);
        return LineFactors { propagator: (d - m).recip(), counterterm: Some(m) };
    }
    let mut g = T::zero();
    for (n, w) in &weights {
        g += (d - cumulative(*n)).recip().scale(Complex64::new(*w, 0.0));
    }
    // effective counterterm so that 1/g = D − 𝓜
    LineFactors { propagator: g, counterterm: Some(d - g.recip()) }
}

fn run_renormalized<T: Coeff>(spec: &ProblemSpec, part: &ScalePartition, eps: T, k_m: u32, k_max: usize) -> Result<Vec<SparseMap<T>>> {
    if spec.nonlinearity().is_linear() {
        return Err(Error::precondition("the renormalized expansion needs a nonlinear g"));
    }
    let (leading, per_scale) = counterterm_values(spec, part, eps, k_m);
    let freq = spec.freq().clone();
    let out = run_engine(spec, k_max, eps, |nu| {
        let x = small_divisor(&freq, nu);
        if x == 0.0 {
            return Err(Error::Resonance { mode: nu.components().to_vec() });
        }
        Ok(line_factors(x, eps, leading, &per_scale, part))
    })?;
    Ok(out.orders)
}

/// μ-expansion with renormalized propagators on every line.
pub fn qp_resummed_orders(spec: &ProblemSpec, part: &ScalePartition, table: &CountertermTable, k_max: usize) -> Result<SeriesExpansion> {
    if (table.eps - spec.epsilon()).norm() > 0.0 {
        return Err(Error::precondition("counterterm table was built for a different epsilon"));
    }
    let orders = run_renormalized(spec, part, spec.epsilon(), table.k_m, k_max)?;
    let real = spec.is_real();
    let orders: Vec<TrigSeries> = orders.into_iter().map(|m| TrigSeries::from_map_unchecked(spec.dim(), m, real)).collect();
    let constants = orders.iter().map(|o| o.zero_mode().re).collect();
    Ok(SeriesExpansion { orders, constants, kind: ExpansionKind::Resummed, problem: spec.clone() })
}

/// The renormalized recursion on ε-jets; collecting by powers of ε gives the formal orders.
pub fn qp_eps_jets<const N: usize>(spec: &ProblemSpec, part: &ScalePartition, k_m: u32, k_max: usize) -> Result<Vec<SparseMap<EpsJet<N>>>> {
    run_renormalized(spec, part, EpsJet::<N>::variable(), k_m, k_max)
}

/// Largest |𝓜^{[n−1]}(x)| / |x(1+iεx)| over the given momenta, each at its own scale.
pub fn counterterm_smallness(xs: &[f64], table: &CountertermTable, part: &ScalePartition) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &x in xs {
        let d = dressed_denominator(table.eps, x);
        for (n, _) in part.weights(x) {
            worst = worst.max(table.cumulative(n).norm() / d.norm());
        }
    }
    Ok(worst)
}

/// Distinct |ω·ν| over the support of an expansion, increasing.
pub fn populated_divisors(e: &SeriesExpansion) -> Vec<f64> {
    let freq = e.problem.freq();
    let mut xs: Vec<f64> = e
        .orders
        .iter()
        .flat_map(|o| o.iter().map(|(m, _)| small_divisor(freq, m).abs()).collect::<Vec<_>>())
        .filter(|x| *x > 0.0)
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// All nonzero modes up to |ν| ≤ radius, useful as an x-sample for the audits.
pub fn divisors_within(spec: &ProblemSpec, radius: u32) -> Vec<f64> {
    let mut xs: Vec<f64> = crate::fourier_core::modes_within(spec.dim(), radius)
        .iter()
        .filter(|m| m.is_canonical())
        .map(|m| small_divisor(spec.freq(), m).abs())
        .filter(|x| *x > 0.0)
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_scales() {
        let p = ScalePartition::new(0.5, CutoffStyle::Sharp, 20).unwrap();
        assert_eq!(assign_scale(0.5, &p).unwrap(), 0);
        assert_eq!(assign_scale(7.0, &p).unwrap(), 0);
        assert_eq!(assign_scale(0.5 * 2f64.powf(-3.5), &p).unwrap(), 3);
        assert_eq!(assign_scale(0.5 / 16.0, &p).unwrap(), 3);
        assert_eq!(assign_scale(0.5 / 16.0 * (1.0 - 1e-15), &p).unwrap(), 4);
        assert!(assign_scale(0.0, &p).is_err());
    }

    #[test]
    fn sharp_weights_single() {
        let p = ScalePartition::new(0.3, CutoffStyle::Sharp, 30).unwrap();
        for i in 1..2000 {
            let x = 1e-4 * 1.007f64.powi(i);
            let w = p.weights(x);
            assert_eq!(w.len(), 1);
            assert_eq!(w[0], (assign_scale(x, &p).unwrap(), 1.0));
        }
    }

    #[test]
    fn smooth_supports() {
        let p = ScalePartition::new(0.3, CutoffStyle::Smooth, 30).unwrap();
        for i in 1..2000 {
            let x = 1e-4 * 1.007f64.powi(i);
            for n in 0..20u32 {
                if p.psi(n as i64, x) != 0.0 {
                    assert!(x >= 2f64.powi(-(n as i32 + 1)) * p.c0);
                }
                if p.chi(n as i64, x) != 0.0 {
                    assert!(x <= 2f64.powi(-(n as i32)) * p.c0);
                }
            }
        }
    }
}
