use super::expansion::SeriesExpansion;
use super::recursion::support_bound;
use crate::error::{Error, Result};
use crate::fit::{least_squares, ln_factorial};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthModel {
    Geometric,
    Factorial,
}

/// ln m_k ≈ c₁ + c₂k (+ σ ln k!).
#[derive(Debug, Clone, Serialize)]
pub struct GrowthFit {
    pub sigma: f64,
    pub c1: f64,
    pub c2: f64,
    pub rss: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub norms: Vec<f64>,
    /// Orders used in the fit (inclusive).
    pub window: (usize, usize),
    pub geometric: GrowthFit,
    pub factorial: Vec<GrowthFit>,
    pub selected: GrowthModel,
    /// σ from the unconstrained fit c₁ + c₂k + σ ln k!.
    pub sigma_hat: f64,
    /// e^{c₂} of the geometric fit.
    pub geometric_ratio: f64,
}

impl GrowthReport {
    pub fn best_factorial(&self) -> &GrowthFit {
        self.factorial
            .iter()
            .min_by(|a, b| a.rss.total_cmp(&b.rss))
            .expect("at least one factorial candidate")
    }
}

/// Per-order max norms and a comparison of geometric against factorial growth.
///
/// The first ⌈K/5⌉ orders are treated as transient and left out of the fit.
/// Factorial exponents are tried from {1, max(1,τ), 2τ}.
pub fn growth_diagnostic(e: &SeriesExpansion) -> Result<GrowthReport> {
    let k_max = e.max_order();
    if k_max < 6 {
        return Err(Error::precondition("growth diagnostic needs K >= 6"));
    }
    let norms = e.order_norms();
    let lo = k_max.div_ceil(5).max(1);
    let ks: Vec<usize> = (lo..=k_max).filter(|&k| norms[k] > 0.0).collect();
    if ks.len() < 4 {
        return Err(Error::precondition("too few nonzero orders to fit growth"));
    }
    let y: Vec<f64> = ks.iter().map(|&k| norms[k].ln()).collect();

    let geo_design: Vec<Vec<f64>> = ks.iter().map(|&k| vec![1.0, k as f64]).collect();
    let (g, grss) = least_squares(&geo_design, &y);
    let geometric = GrowthFit { sigma: 0.0, c1: g[0], c2: g[1], rss: grss };

    let tau = e.problem.freq().tau();
    let mut sigmas: Vec<f64> = vec![1.0, tau.max(1.0), 2.0 * tau];
    sigmas.retain(|s| *s > 0.0);
    sigmas.sort_by(f64::total_cmp);
    sigmas.dedup();
    let factorial: Vec<GrowthFit> = sigmas
        .iter()
        .map(|&sigma| {
            let shifted: Vec<f64> = ks.iter().zip(&y).map(|(&k, v)| v - sigma * ln_factorial(k)).collect();
            let (c, rss) = least_squares(&geo_design, &shifted);
            GrowthFit { sigma, c1: c[0], c2: c[1], rss }
        })
        .collect();

    let free_design: Vec<Vec<f64>> = ks.iter().map(|&k| vec![1.0, k as f64, ln_factorial(k)]).collect();
    let (free, _) = least_squares(&free_design, &y);

    let best_rss = factorial.iter().map(|f| f.rss).fold(f64::INFINITY, f64::min);
    let selected = if best_rss < geometric.rss { GrowthModel::Factorial } else { GrowthModel::Geometric };
    Ok(GrowthReport {
        norms,
        window: (lo, k_max),
        geometric_ratio: geometric.c2.exp(),
        geometric,
        factorial,
        selected,
        sigma_hat: free[2],
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SupportRow {
    pub k: usize,
    pub max_mode: u32,
    pub bound: u32,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SupportReport {
    pub degree: u32,
    pub rows: Vec<SupportRow>,
}

impl SupportReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Compares each order's populated radius with [(k+1)/2]·N.
pub fn support_check(e: &SeriesExpansion, degree: u32) -> SupportReport {
    let rows = e
        .orders
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let max_mode = s.support_radius();
            let bound = support_bound(k, degree);
            SupportRow { k, max_mode, bound, pass: max_mode <= bound }
        })
        .collect();
    SupportReport { degree, rows }
}
