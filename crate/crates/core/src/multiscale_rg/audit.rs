//! Numerical audits of the propagator lower bounds and of the line-counting bound.

use super::{assign_scale, counterterm_values, gamma_of, linear_constant, ScalePartition};
use crate::error::Result;
use crate::fit::least_squares;
use crate::formal_expansion::ExpansionKind;
use crate::fourier_core::{modes_within, small_divisor, Mode, ProblemSpec};
use crate::tree_engine::{bullet_modes, line_momenta, EnumerationLimits, TreeGenerator};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone)]
pub struct AuditGrid {
    pub radius: f64,
    pub lambdas: Vec<f64>,
    pub n_rho: usize,
    pub n_phi: usize,
    /// Momenta are all ω·ν with 0 < |ν| ≤ this radius.
    pub mode_radius: u32,
    pub k_m: u32,
}

impl Default for AuditGrid {
    fn default() -> Self {
        AuditGrid { radius: 0.2, lambdas: vec![1.0, 0.5, 0.25, 0.125], n_rho: 40, n_phi: 40, mode_radius: 40, k_m: 3 }
    }
}

impl AuditGrid {
    /// ε in the two discs of radius R/2 centred at ±R/2, i.e. |Re ε⁻¹| > R⁻¹.
    pub fn disc_points(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(2 * self.n_rho * self.n_phi);
        for i in 0..self.n_rho {
            let rho = (i as f64 + 0.5) / self.n_rho as f64;
            for j in 0..self.n_phi {
                let phi = 2.0 * PI * j as f64 / self.n_phi as f64;
                let z = 0.5 * self.radius * (Complex64::new(1.0, 0.0) + Complex64::from_polar(rho, phi));
                out.push(z);
                out.push(-z);
            }
        }
        out
    }

    /// ε = a + ib with |ε| < λR and |a| ≥ λ|b|.
    pub fn sector_points(&self, lambda: f64) -> Vec<Complex64> {
        let half = (1.0 / lambda).atan();
        let mut out = Vec::with_capacity(2 * self.n_rho * self.n_phi);
        for i in 0..self.n_rho {
            let r = lambda * self.radius * (i as f64 + 0.5) / self.n_rho as f64;
            for j in 0..self.n_phi {
                let theta = -half + 2.0 * half * j as f64 / (self.n_phi - 1).max(1) as f64;
                let z = Complex64::from_polar(r, theta);
                out.push(z);
                out.push(-z);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AuditPoint {
    pub eps_re: f64,
    pub eps_im: f64,
    pub x: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaAudit {
    pub lemma: String,
    pub min_ratio: f64,
    pub argmin: AuditPoint,
    pub samples: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SharpnessProbe {
    pub eps_im: f64,
    pub x: f64,
    /// |F| / (γx²/2) at the probe.
    pub ratio: f64,
    pub outside_domain: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundAuditReport {
    pub radius: f64,
    pub c0: f64,
    pub gamma: f64,
    pub c1: f64,
    pub audits: Vec<LemmaAudit>,
    /// Local log–log slope of min |F|/(γ|x|) against λ at the two smallest λ.
    pub lambda_slope: f64,
    /// Largest |c₂(ε,x)| = |M(x) − M(0)| / |ε²x| on the grid.
    pub c2_max: f64,
    pub sharpness: SharpnessProbe,
}

impl BoundAuditReport {
    pub fn all_pass(&self) -> bool {
        self.audits.iter().all(|a| a.pass)
    }
}

struct Evaluator<'a> {
    spec: &'a ProblemSpec,
    part: &'a ScalePartition,
    k_m: u32,
}

impl Evaluator<'_> {
    /// (F₀, F, scale) at momentum x and parameter ε.
    fn at(&self, eps: Complex64, cum: &[Complex64], x: f64) -> (Complex64, Complex64, u32) {
        let f0 = I * x * (Complex64::new(1.0, 0.0) + I * eps * x);
        let n = assign_scale(x, self.part).unwrap_or(0);
        let m = cum[(n as usize).min(cum.len() - 1)];
        (f0, f0 - m, n)
    }

    /// Counterterms Σ_{n'<n} M^[n'] for every n at this ε.
    fn cumulative(&self, eps: Complex64) -> Vec<Complex64> {
        let (leading, per) = counterterm_values(self.spec, self.part, eps, self.k_m);
        let mut acc = leading;
        let mut out = Vec::with_capacity(per.len());
        for v in &per {
            out.push(acc);
            acc += v;
        }
        out
    }
}

type Bound<'a> = dyn Fn(Complex64, Complex64, f64, u32) -> f64 + Sync + 'a;

fn scan(name: &str, eval: &Evaluator, points: &[Complex64], xs: &[f64], bound: &Bound) -> LemmaAudit {
    let best = points
        .par_iter()
        .map(|&eps| {
            let cum = eval.cumulative(eps);
            let mut local = (f64::INFINITY, AuditPoint { eps_re: eps.re, eps_im: eps.im, x: 0.0 });
            for &x in xs {
                let (f0, f, n) = eval.at(eps, &cum, x);
                let r = bound(f0, f, x, n);
                if r < local.0 {
                    local = (r, AuditPoint { eps_re: eps.re, eps_im: eps.im, x });
                }
            }
            local
        })
        .reduce(|| (f64::INFINITY, AuditPoint { eps_re: 0.0, eps_im: 0.0, x: 0.0 }), |a, b| if b.0 < a.0 { b } else { a });
    LemmaAudit { lemma: name.to_string(), min_ratio: best.0, argmin: best.1, samples: points.len() * xs.len(), pass: best.0 >= 1.0 }
}

/// Minimum over the grids of (bounded quantity)/(stated lower bound) for each lemma.
pub fn bound_lemma_audit(grid: &AuditGrid, part: &ScalePartition, spec: &ProblemSpec) -> Result<BoundAuditReport> {
    let c0 = part.c0;
    let gamma = gamma_of(spec);
    let c1 = gamma * c0 * c0 / 8.0;
    let eval = Evaluator { spec, part, k_m: grid.k_m };
    let mut xs: Vec<f64> = modes_within(spec.dim(), grid.mode_radius)
        .iter()
        .filter(|m| m.is_canonical())
        .map(|m| small_divisor(spec.freq(), m).abs())
        .filter(|x| *x > 0.0)
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let small: Vec<f64> = xs.iter().copied().filter(|x| *x < c0).collect();
    let disc = grid.disc_points();
    let real: Vec<Complex64> = (0..2 * grid.n_rho)
        .map(|i| Complex64::new(grid.radius * ((i as f64 + 0.5) / grid.n_rho as f64 - 1.0), 0.0))
        .collect();

    let mut audits = Vec::new();
    let mut slope_pts = Vec::new();
    for &lambda in &grid.lambdas {
        let sector = grid.sector_points(lambda);
        audits.push(scan(&format!("free sector lambda={lambda}"), &eval, &sector, &xs, &|f0, _, x, _| f0.norm() / (lambda * x / 2.0)));
        let l7 = scan(&format!("dressed sector lambda={lambda}"), &eval, &sector, &small, &|_, f, x, _| f.norm() / (lambda * gamma * x / 8.0));
        slope_pts.push((lambda.ln(), (l7.min_ratio * lambda / 8.0).ln()));
        audits.push(l7);
    }
    audits.push(scan("disc quadratic", &eval, &disc, &small, &|_, f, x, _| f.norm() / (gamma * x * x / 2.0)));
    audits.push(scan("disc scale growth", &eval, &disc, &xs, &|_, f, _, n| 4f64.powi(n as i32) / c1 * f.norm()));
    audits.push(scan("real-axis propagator", &eval, &real, &xs, &|_, f, _, n| 2f64.powi(n as i32) * 2.0 / c0 * f.norm()));

    slope_pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let lambda_slope = match slope_pts.as_slice() {
        [a, b, ..] => (b.1 - a.1) / (b.0 - a.0),
        _ => f64::NAN,
    };

    // F vanishes at ε = ib with b = −x/(c − x²) when the counterterm is truncated at order 1
    let c = linear_constant(spec);
    let x = small.get(small.len() / 2).copied().unwrap_or(c0 / 2.0);
    let b = -x / (c - x * x);
    let eps = Complex64::new(0.0, b);
    let cum = eval.cumulative(eps);
    let (_, f, _) = eval.at(eps, &cum, x);
    let inv = eps.inv();
    let sharpness = SharpnessProbe { eps_im: b, x, ratio: f.norm() / (gamma * x * x / 2.0), outside_domain: inv.re.abs() <= 1.0 / grid.radius };

    Ok(BoundAuditReport { radius: grid.radius, c0, gamma, c1, audits, lambda_slope, c2_max: 0.0, sharpness })
}

#[derive(Debug, Clone, Serialize)]
pub struct LineCountReport {
    pub k_max: usize,
    pub trees: usize,
    /// max over trees of N_{n'}(θ) / (2^{−n'/τ} Σ|ν_v|), per n' ≥ 1.
    pub per_scale: Vec<(u32, f64)>,
    pub fitted_k: f64,
}

/// Counts lines on scale ≥ n' on every tree up to order `k_max`.
pub fn line_count_audit(spec: &ProblemSpec, part: &ScalePartition, k_max: usize) -> Result<LineCountReport> {
    let tau = spec.freq().tau().max(1.0);
    let mut gen = TreeGenerator::new(spec, ExpansionKind::Resummed, u32::MAX, EnumerationLimits { k_max, ..Default::default() });
    let degree = spec.forcing_degree();
    let mut trees = 0;
    let mut per: Vec<f64> = Vec::new();
    for k in 1..=k_max {
        let radius = crate::formal_expansion::support_bound(k, degree);
        let mut targets = modes_within(spec.dim(), radius);
        targets.push(Mode::zero(spec.dim()));
        for nu in targets {
            let class = gen.class(k, &nu)?;
            for node in class.iter() {
                trees += 1;
                let tree = crate::tree_engine::Tree { root: node.clone(), k, nu: nu.clone(), expansion: ExpansionKind::Resummed };
                let mass: u32 = bullet_modes(&tree).iter().map(|m| m.l1()).sum();
                let scales: Vec<u32> = line_momenta(&tree)
                    .iter()
                    .filter(|m| !m.is_zero())
                    .map(|m| assign_scale(small_divisor(spec.freq(), m), part))
                    .collect::<Result<_>>()?;
                let top = scales.iter().copied().max().unwrap_or(0);
                for n in 1..=top {
                    let count = scales.iter().filter(|s| **s >= n).count() as f64;
                    let ratio = count / (2f64.powf(-(n as f64) / tau) * mass as f64);
                    if per.len() < n as usize {
                        per.resize(n as usize, 0.0);
                    }
                    per[n as usize - 1] = per[n as usize - 1].max(ratio);
                }
            }
        }
    }
    let fitted_k = per.iter().copied().fold(0.0, f64::max);
    Ok(LineCountReport { k_max, trees, per_scale: per.iter().enumerate().map(|(i, r)| (i as u32 + 1, *r)).collect(), fitted_k })
}

#[derive(Debug, Clone, Serialize)]
pub struct FibonacciRow {
    pub n: u32,
    pub mode: Mode,
    pub x: f64,
    pub scale: u32,
}

/// Scales of ν = (−F_n, F_{n+1}) and the fitted growth of scale in n.
pub fn fibonacci_scales(spec: &ProblemSpec, part: &ScalePartition, count: u32) -> Result<(Vec<FibonacciRow>, f64)> {
    let (mut a, mut b) = (1i32, 1i32);
    let mut rows = Vec::new();
    for n in 1..=count {
        let mode = Mode::new(&[-a, b]);
        let x = small_divisor(spec.freq(), &mode);
        rows.push(FibonacciRow { n, scale: assign_scale(x, part)?, mode, x });
        let next = a + b;
        a = b;
        b = next;
    }
    let design: Vec<Vec<f64>> = rows.iter().map(|r| vec![1.0, r.n as f64]).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.scale as f64).collect();
    let slope = least_squares(&design, &y).0[1];
    Ok((rows, slope))
}
