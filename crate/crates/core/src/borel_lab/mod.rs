//! Borel transform, Padé continuation in the Borel plane and Laplace
//! re-summation of the formal series, mode by mode.

mod laplace;
mod pade;

pub use laplace::{laplace_sum, LaplaceOptions, LaplaceValue};
pub use pade::{pade, pade_fallback, pade_with, ComplexDD, PadeScalar, Precision, Rational};

use crate::error::{Error, Result};
use crate::fit::{aic, least_squares, ln_factorial};
use crate::formal_expansion::{ExpansionKind, SeriesExpansion};
use crate::fourier_core::{FrequencyVector, Mode, TrigSeries};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeSet;

#[derive(Debug, Clone)]
pub struct BorelSeries {
    /// b_k = x^(k)/k!.
    pub coeffs: Vec<TrigSeries>,
    /// The formal orders the coefficients were built from.
    pub originals: Vec<TrigSeries>,
    pub radius_est: f64,
}

fn radius_from_norms(norms: &[f64]) -> f64 {
    let pts: Vec<(usize, f64)> = norms.iter().copied().enumerate().filter(|(k, m)| *k >= 1 && *m > 0.0).collect();
    if pts.len() < 2 {
        return f64::INFINITY;
    }
    // geometric mean of the ratios over the upper half of the populated orders
    let start = pts[pts.len() / 2].0.min(pts[pts.len() - 2].0);
    let (k0, m0) = pts.iter().find(|(k, _)| *k >= start).copied().unwrap_or(pts[0]);
    let (k1, m1) = *pts.last().unwrap_or(&pts[0]);
    if k1 == k0 {
        return f64::INFINITY;
    }
    (m0 / m1).powf(1.0 / (k1 - k0) as f64)
}

pub fn borel_transform(e: &SeriesExpansion) -> Result<BorelSeries> {
    if e.kind != ExpansionKind::Formal {
        return Err(Error::precondition("the Borel transform takes the formal series"));
    }
    let mut fact = 1.0;
    let mut coeffs = Vec::with_capacity(e.orders.len());
    for (k, x) in e.orders.iter().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        coeffs.push(x.scale(Complex64::new(1.0 / fact, 0.0)));
    }
    let norms: Vec<f64> = coeffs.iter().map(|c| c.max_abs()).collect();
    Ok(BorelSeries { radius_est: radius_from_norms(&norms), coeffs, originals: e.orders.clone() })
}

#[derive(Debug, Clone, Copy)]
pub struct BorelOptions {
    pub max_denominator: usize,
    pub precision: Precision,
    pub laplace: LaplaceOptions,
    /// Poles with |residue| below this on the integration path are deflated.
    pub deflation_residue: f64,
}

impl Default for BorelOptions {
    fn default() -> Self {
        BorelOptions { max_denominator: 6, precision: Precision::Double, laplace: LaplaceOptions::default(), deflation_residue: 1e-10 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeSum {
    pub mode: Mode,
    pub leading_order: usize,
    pub pade_orders: (usize, usize),
    pub poles: Vec<Complex64>,
    pub deflated: usize,
    pub value: Complex64,
    pub error: f64,
}

#[derive(Debug, Clone)]
pub struct BorelSum {
    pub eps: f64,
    pub k_used: usize,
    pub series: TrigSeries,
    pub modes: Vec<ModeSum>,
}

impl BorelSum {
    pub fn evaluate(&self, freq: &FrequencyVector, t: f64) -> f64 {
        self.series.evaluate_real(freq, t)
    }

    /// Bound on the sup-norm error from the per-mode estimates.
    pub fn error_bound(&self) -> f64 {
        self.modes.iter().map(|m| if m.mode.is_zero() { m.error } else { 2.0 * m.error }).sum()
    }
}

struct GermSum {
    value: Complex64,
    laplace_error: f64,
    orders: (usize, usize),
    poles: Vec<Complex64>,
    deflated: usize,
}

/// Padé–Laplace evaluation of ε^{k₀}(1/ε)∫e^{−s/ε} Σ a_j s^j ds.
fn sum_germ(a: &[Complex64], eps: f64, k0: usize, opts: &BorelOptions) -> Result<GermSum> {
    let n = a.len() - 1;
    // rescale s so the germ coefficients are of comparable size
    let ratios: Vec<f64> = (1..=n).filter(|&j| a[j].norm() > 0.0).map(|j| (a[0].norm() / a[j].norm()).powf(1.0 / j as f64)).collect();
    let rho = if ratios.is_empty() {
        1.0
    } else {
        let mut r = ratios.clone();
        r.sort_by(f64::total_cmp);
        r[r.len() / 2]
    };
    let scaled: Vec<Complex64> = a.iter().enumerate().map(|(j, c)| c * rho.powi(j as i32)).collect();
    let m = opts.max_denominator.min(n / 2);
    let mut rat = pade_fallback(&scaled, n - m, m, opts.precision)?;
    let orders = rat.degrees();
    let path = 100.0 * eps;
    let poles = rat.poles();
    let mut deflated = 0;
    for p in &poles {
        let ps = p * rho;
        let near_axis = ps.im.abs() <= 1e-3 * ps.norm();
        if near_axis && ps.re > 0.0 && ps.re < path {
            let residue = rat.residue(*p) * rho;
            if residue.norm() < opts.deflation_residue {
                rat = rat.deflate(*p);
                deflated += 1;
            } else {
                return Err(Error::PoleOnPath { re: ps.re, im: ps.im, residue: residue.norm() });
            }
        }
    }
    let lv = laplace_sum(|s| rat.eval(Complex64::new(s / rho, 0.0)), eps, &opts.laplace)?;
    let pow = eps.powi(k0 as i32);
    Ok(GermSum { value: lv.value * pow, laplace_error: lv.error() * pow, orders, poles: poles.iter().map(|p| p * rho).collect(), deflated })
}

/// Borel–Padé–Laplace sum of every Fourier mode of a formal expansion at real ε > 0.
pub fn borel_pade_laplace(e: &SeriesExpansion, eps: f64, opts: &BorelOptions) -> Result<BorelSum> {
    if e.kind != ExpansionKind::Formal {
        return Err(Error::precondition("Borel summation takes the formal series"));
    }
    let real = e.orders.iter().all(|o| o.is_real_valued());
    let modes: BTreeSet<Mode> = e
        .orders
        .iter()
        .flat_map(|o| o.iter().map(|(m, _)| m.clone()))
        .filter(|m| !real || m.is_zero() || m.is_canonical())
        .collect();
    let k_max = e.max_order();
    let modes: Vec<Mode> = modes.into_iter().collect();
    let results: Vec<Result<Option<ModeSum>>> = modes
        .par_iter()
        .map(|mode| {
            let raw: Vec<Complex64> = (0..=k_max).map(|k| e.orders[k].get(mode)).collect();
            let Some(k0) = raw.iter().position(|c| c.norm() > 0.0) else { return Ok(None) };
            let mut fact = 1.0;
            let germ: Vec<Complex64> = raw[k0..]
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    if j > 0 {
                        fact *= j as f64;
                    }
                    c / fact
                })
                .collect();
            if germ.len() < 3 {
                // too short for a continuation; the truncated sum is exact to the available order
                let v: Complex64 = germ.iter().enumerate().map(|(j, c)| c * eps.powi((k0 + j) as i32) * (1..=j).product::<usize>() as f64).sum();
                return Ok(Some(ModeSum { mode: mode.clone(), leading_order: k0, pade_orders: (germ.len() - 1, 0), poles: vec![], deflated: 0, value: v, error: 0.0 }));
            }
            let full = sum_germ(&germ, eps, k0, opts)?;
            let short = sum_germ(&germ[..germ.len() - 1], eps, k0, opts)?;
            Ok(Some(ModeSum {
                mode: mode.clone(),
                leading_order: k0,
                pade_orders: full.orders,
                poles: full.poles,
                deflated: full.deflated,
                value: full.value,
                error: (full.value - short.value).norm() + full.laplace_error,
            }))
        })
        .collect();
    let mut sums = Vec::new();
    for r in results {
        if let Some(s) = r? {
            sums.push(s);
        }
    }
    let pairs: Vec<(Mode, Complex64)> = sums.iter().map(|s| (s.mode.clone(), s.value)).collect();
    let series = if real { TrigSeries::real_from_pairs(e.problem.dim(), pairs)? } else { TrigSeries::from_pairs(e.problem.dim(), pairs)? };
    Ok(BorelSum { eps, k_used: k_max, series, modes: sums })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RemainderRow {
    pub n: usize,
    pub remainder: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AsymptoticFit {
    pub log_a: f64,
    pub log_b: f64,
    pub rss: f64,
    pub aic: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticityReport {
    pub eps: f64,
    pub rows: Vec<RemainderRow>,
    pub n_star: usize,
    pub dip_then_rise: bool,
    pub factorial: AsymptoticFit,
    pub geometric: AsymptoticFit,
}

impl AsymptoticityReport {
    pub fn factorial_preferred(&self) -> bool {
        self.factorial.aic < self.geometric.aic
    }

    pub fn fitted_b(&self) -> f64 {
        self.factorial.log_b.exp()
    }
}

/// Remainders below this are at the level of rounding in the reference.
pub const REMAINDER_FLOOR: f64 = 1e-13;

fn fit_models(data: &[(f64, usize, f64)]) -> Result<(AsymptoticFit, AsymptoticFit)> {
    // data: (eps, N, remainder)
    let pts: Vec<&(f64, usize, f64)> = data.iter().filter(|(_, n, r)| *n >= 1 && *r > REMAINDER_FLOOR).collect();
    if pts.len() < 3 {
        return Err(Error::precondition("too few remainders above the rounding floor to fit"));
    }
    let rows: Vec<Vec<f64>> = pts.iter().map(|(_, n, _)| vec![1.0, *n as f64]).collect();
    let fit = |with_factorial: bool| -> Result<AsymptoticFit> {
        let y: Vec<f64> = pts
            .iter()
            .map(|(eps, n, r)| r.ln() - *n as f64 * eps.ln() - if with_factorial { ln_factorial(*n) } else { 0.0 })
            .collect();
        let (c, rss) = least_squares(&rows, &y);
        Ok(AsymptoticFit { log_a: c[0], log_b: c[1], rss, aic: aic(rss, pts.len(), 2), points: pts.len() })
    };
    Ok((fit(true)?, fit(false)?))
}

/// Largest coefficient difference over all modes.
fn coefficient_distance(a: &TrigSeries, b: &TrigSeries) -> f64 {
    let modes: BTreeSet<&Mode> = a.iter().map(|(m, _)| m).chain(b.iter().map(|(m, _)| m)).collect();
    modes.into_iter().map(|m| (a.get(m) - b.get(m)).norm()).fold(0.0, f64::max)
}

/// Remainders |reference − Σ_{k<N} εᵏx^(k)| (largest coefficient difference) for N in `n_range`, with the
/// A Bᴺ N! εᴺ and A Bᴺ εᴺ fits.
pub fn asymptoticity_check(e: &SeriesExpansion, reference: &TrigSeries, eps: f64, n_range: std::ops::RangeInclusive<usize>) -> Result<AsymptoticityReport> {
    if e.kind != ExpansionKind::Formal {
        return Err(Error::precondition("asymptoticity is checked on the formal series"));
    }
    let n_hi = (*n_range.end()).min(e.max_order() + 1);
    let mut partial = TrigSeries::zero(reference.dim());
    let mut rows = Vec::new();
    for n in 0..=n_hi {
        if n >= *n_range.start() {
            rows.push(RemainderRow { n, remainder: coefficient_distance(reference, &partial) });
        }
        if n < e.orders.len() {
            partial = partial.add(&e.orders[n].scale(Complex64::new(eps.powi(n as i32), 0.0)))?;
        }
    }
    let (i_star, _) = rows.iter().enumerate().fold((0, f64::INFINITY), |b, (i, r)| if r.remainder < b.1 { (i, r.remainder) } else { b });
    let min = rows[i_star].remainder;
    let dips = rows[..i_star].iter().any(|r| r.remainder > 10.0 * min);
    let rises = rows[i_star + 1..].iter().any(|r| r.remainder > 10.0 * min);
    let data: Vec<(f64, usize, f64)> = rows.iter().map(|r| (eps, r.n, r.remainder)).collect();
    let (factorial, geometric) = fit_models(&data)?;
    Ok(AsymptoticityReport { eps, n_star: rows[i_star].n, dip_then_rise: dips && rises, rows, factorial, geometric })
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticSweep {
    pub reports: Vec<AsymptoticityReport>,
    pub joint_factorial: AsymptoticFit,
    pub joint_geometric: AsymptoticFit,
    /// max/min of the per-ε fitted B.
    pub b_spread: f64,
}

impl AsymptoticSweep {
    pub fn from_reports(reports: Vec<AsymptoticityReport>) -> Result<Self> {
        let data: Vec<(f64, usize, f64)> = reports.iter().flat_map(|r| r.rows.iter().map(move |row| (r.eps, row.n, row.remainder))).collect();
        let (joint_factorial, joint_geometric) = fit_models(&data)?;
        let bs: Vec<f64> = reports.iter().map(|r| r.fitted_b()).collect();
        let b_spread = bs.iter().cloned().fold(0.0, f64::max) / bs.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(AsymptoticSweep { reports, joint_factorial, joint_geometric, b_spread })
    }

    pub fn n_star_decreasing(&self) -> bool {
        let mut r: Vec<(f64, usize)> = self.reports.iter().map(|r| (r.eps, r.n_star)).collect();
        r.sort_by(|a, b| a.0.total_cmp(&b.0));
        r.windows(2).all(|w| w[1].1 <= w[0].1) && r.first().map(|f| f.1) > r.last().map(|l| l.1)
    }
}
