use super::coeff::Coeff;
use super::freq::FrequencyVector;
use super::mode::Mode;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Relative ℓ¹ mass below which budget pruning is allowed.
pub const PRUNE_TOLERANCE: f64 = 1e-16;

/// Analyticity envelope |c_ν| ≤ F e^{−ξ|ν|}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayEnvelope {
    pub amplitude: f64,
    pub xi: f64,
}

impl DecayEnvelope {
    pub fn bound(&self, mode: &Mode) -> f64 {
        self.amplitude * (-self.xi * mode.l1() as f64).exp()
    }
}

/// Sparse trigonometric series Σ c_ν e^{iν·ψ}.
///
/// Real-valued series store the zero mode and the canonical half (first
/// nonzero component positive); the mirror half is derived on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigSeries {
    dim: usize,
    coeffs: BTreeMap<Mode, Complex64>,
    real_valued: bool,
    decay: Option<DecayEnvelope>,
    budget: Option<u32>,
}

impl TrigSeries {
    pub fn zero(dim: usize) -> Self {
        TrigSeries { dim, coeffs: BTreeMap::new(), real_valued: true, decay: None, budget: None }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut s = Self::zero(dim);
        if c != 0.0 {
            s.coeffs.insert(Mode::zero(dim), Complex64::new(c, 0.0));
        }
        s
    }

    /// Complex series with no symmetry assumed. Exact zeros are dropped.
    pub fn from_pairs<I>(dim: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Mode, Complex64)>,
    {
        let mut coeffs = BTreeMap::new();
        for (m, c) in pairs {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: m.dim() });
            }
            if c != Complex64::new(0.0, 0.0) {
                *coeffs.entry(m).or_insert(Complex64::new(0.0, 0.0)) += c;
            }
        }
        Ok(TrigSeries { dim, coeffs, real_valued: false, decay: None, budget: None })
    }

    /// Real-valued series. Entries on the non-canonical half are ignored and
    /// rebuilt as conjugates of their canonical partners; the zero mode keeps
    /// only its real part.
    pub fn real_from_pairs<I>(dim: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Mode, Complex64)>,
    {
        let mut s = Self::from_pairs(dim, pairs)?;
        s.real_valued = true;
        s.symmetrize();
        Ok(s)
    }

    /// f = α + β sin(ω t), d = 1.
    pub fn alpha_beta_sin(alpha: f64, beta: f64) -> Self {
        Self::real_from_pairs(
            1,
            [
                (Mode::scalar(0), Complex64::new(alpha, 0.0)),
                (Mode::scalar(1), Complex64::new(0.0, -beta / 2.0)),
            ],
        )
        .expect("dimension is consistent")
    }

    fn symmetrize(&mut self) {
        let mut rebuilt = BTreeMap::new();
        for (m, c) in &self.coeffs {
            if m.is_zero() {
                if c.re != 0.0 {
                    rebuilt.insert(m.clone(), Complex64::new(c.re, 0.0));
                }
            } else if m.is_canonical() {
                rebuilt.insert(m.neg(), c.conj());
                rebuilt.insert(m.clone(), *c);
            }
        }
        self.coeffs = rebuilt;
    }

    pub fn with_decay(mut self, decay: DecayEnvelope) -> Result<Self> {
        for (m, c) in &self.coeffs {
            if c.norm() > decay.bound(m) * (1.0 + 1e-12) {
                return Err(Error::invalid(format!(
                    "coefficient at {m} exceeds the decay envelope"
                )));
            }
        }
        self.decay = Some(decay);
        Ok(self)
    }

    pub fn with_budget(mut self, radius: u32) -> Self {
        self.budget = Some(radius);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    pub fn decay(&self) -> Option<DecayEnvelope> {
        self.decay
    }

    pub fn budget(&self) -> Option<u32> {
        self.budget
    }

    pub fn get(&self, mode: &Mode) -> Complex64 {
        self.coeffs.get(mode).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn zero_mode(&self) -> Complex64 {
        self.get(&Mode::zero(self.dim))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mode, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> Vec<(Mode, Complex64)> {
        self.coeffs.iter().map(|(m, c)| (m.clone(), *c)).collect()
    }

    /// Largest populated |ν| (0 for an empty series).
    pub fn support_radius(&self) -> u32 {
        self.coeffs.keys().map(|m| m.l1()).max().unwrap_or(0)
    }

    pub fn l1_mass(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn convolve(&self, other: &TrigSeries) -> Result<TrigSeries> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        let product = convolve_terms(self.dim, &self.terms(), &other.terms());
        let mut out = TrigSeries {
            dim: self.dim,
            coeffs: product.into_iter().collect(),
            real_valued: self.real_valued && other.real_valued,
            decay: None,
            budget: self.budget.or(other.budget),
        };
        if out.real_valued {
            out.symmetrize();
        }
        out.enforce_budget()?;
        Ok(out)
    }

    /// Drops modes beyond the budget when their mass is negligible.
    pub fn enforce_budget(&mut self) -> Result<()> {
        let Some(budget) = self.budget else { return Ok(()) };
        let total = self.l1_mass();
        let pruned: f64 =
            self.coeffs.iter().filter(|(m, _)| m.l1() > budget).map(|(_, c)| c.norm()).sum();
        if pruned == 0.0 {
            return Ok(());
        }
        if pruned > PRUNE_TOLERANCE * total {
            return Err(Error::BudgetExceeded { budget, pruned, total });
        }
        self.coeffs.retain(|m, _| m.l1() <= budget);
        Ok(())
    }

    pub fn add(&self, other: &TrigSeries) -> Result<TrigSeries> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        let mut out = self.clone();
        out.decay = None;
        out.real_valued = self.real_valued && other.real_valued;
        for (m, c) in &other.coeffs {
            *out.coeffs.entry(m.clone()).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        out.coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Ok(out)
    }

    pub fn scale(&self, z: Complex64) -> TrigSeries {
        let mut out = self.clone();
        out.decay = None;
        for c in out.coeffs.values_mut() {
            *c *= z;
        }
        out.real_valued = self.real_valued && z.im == 0.0;
        out
    }

    /// Σ_ν c_ν e^{i(ω·ν)t}.
    pub fn evaluate(&self, freq: &FrequencyVector, t: f64) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for (m, c) in &self.coeffs {
            let phase = m.dot(freq.omega()) * t;
            sum += c * Complex64::from_polar(1.0, phase);
        }
        sum
    }

    /// Real part of `evaluate`; for real-valued series the imaginary part is roundoff.
    pub fn evaluate_real(&self, freq: &FrequencyVector, t: f64) -> f64 {
        self.evaluate(freq, t).re
    }

    /// Evaluates on the torus angle vector ψ directly.
    pub fn evaluate_angles(&self, psi: &[f64]) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for (m, c) in &self.coeffs {
            sum += c * Complex64::from_polar(1.0, m.dot(psi));
        }
        sum
    }

    pub(crate) fn from_map_unchecked(dim: usize, coeffs: BTreeMap<Mode, Complex64>, real_valued: bool) -> Self {
        let mut s = TrigSeries { dim, coeffs, real_valued, decay: None, budget: None };
        s.coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        if real_valued {
            s.symmetrize();
        }
        s
    }
}

/// Cauchy product Σ_{ν₁+ν₂=ν} a(ν₁) b(ν₂) over sparse term lists.
///
/// Accumulates into a dense box spanning the sum of the two bounding boxes,
/// which keeps the inner loop free of hashing.
pub fn convolve_terms<T: Coeff>(dim: usize, a: &[(Mode, T)], b: &[(Mode, T)]) -> Vec<(Mode, T)> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let (alo, ahi) = bounding_box(dim, a);
    let (blo, bhi) = bounding_box(dim, b);
    let lo: Vec<i64> = (0..dim).map(|i| alo[i] + blo[i]).collect();
    let extent: Vec<i64> = (0..dim).map(|i| ahi[i] + bhi[i] - lo[i] + 1).collect();
    let mut stride = vec![1i64; dim];
    for i in (0..dim.saturating_sub(1)).rev() {
        stride[i] = stride[i + 1] * extent[i + 1];
    }
    let size = (0..dim).map(|i| extent[i]).product::<i64>() as usize;
    let index = |m: &Mode, origin: &[i64]| -> i64 {
        m.components().iter().enumerate().map(|(i, &c)| (c as i64 - origin[i]) * stride[i]).sum()
    };
    // a contributes relative to alo, b relative to blo; their sum is relative to lo.
    let ai: Vec<i64> = a.iter().map(|(m, _)| index(m, &alo)).collect();
    let bi: Vec<i64> = b.iter().map(|(m, _)| index(m, &blo)).collect();
    let mut acc = vec![T::zero(); size];
    let mut touched = vec![false; size];
    for (ia, (_, ca)) in ai.iter().zip(a) {
        for (ib, (_, cb)) in bi.iter().zip(b) {
            let k = (ia + ib) as usize;
            acc[k] += *ca * *cb;
            touched[k] = true;
        }
    }
    let mut out = Vec::new();
    for (k, value) in acc.into_iter().enumerate() {
        if !touched[k] || value.is_exact_zero() {
            continue;
        }
        let mut rem = k as i64;
        let mut comps = Vec::with_capacity(dim);
        for i in 0..dim {
            comps.push((rem / stride[i] + lo[i]) as i32);
            rem %= stride[i];
        }
        out.push((Mode::from(comps), value));
    }
    out
}

fn bounding_box<T>(dim: usize, terms: &[(Mode, T)]) -> (Vec<i64>, Vec<i64>) {
    let mut lo = vec![i64::MAX; dim];
    let mut hi = vec![i64::MIN; dim];
    for (m, _) in terms {
        for (i, &c) in m.components().iter().enumerate() {
            lo[i] = lo[i].min(c as i64);
            hi[i] = hi[i].max(c as i64);
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn delta_is_identity() {
        let s = TrigSeries::alpha_beta_sin(2.0, 0.3);
        let delta = TrigSeries::constant(1, 1.0);
        assert_eq!(delta.convolve(&s).unwrap(), s);
    }

    #[test]
    fn square_of_alpha_beta_sin() {
        let (alpha, beta) = (1.7, 0.4);
        let f = TrigSeries::alpha_beta_sin(alpha, beta);
        let sq = f.convolve(&f).unwrap();
        assert!((sq.get(&Mode::scalar(0)) - c(alpha * alpha + beta * beta / 2.0, 0.0)).norm() < 1e-15);
        assert!((sq.get(&Mode::scalar(2)) - c(-beta * beta / 4.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn opposite_supports_land_on_zero() {
        let a = TrigSeries::from_pairs(1, [(Mode::scalar(1), c(1.0, 2.0))]).unwrap();
        let b = TrigSeries::from_pairs(1, [(Mode::scalar(-1), c(0.5, 0.0))]).unwrap();
        let p = a.convolve(&b).unwrap();
        assert!(p.iter().all(|(m, _)| m.is_zero()));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = TrigSeries::constant(1, 1.0);
        let b = TrigSeries::constant(2, 1.0);
        assert_eq!(a.convolve(&b), Err(Error::DimensionMismatch { left: 1, right: 2 }));
    }

    #[test]
    fn mirror_is_derived_from_canonical_half() {
        let s = TrigSeries::real_from_pairs(
            2,
            [(Mode::new(&[1, -1]), c(0.2, 0.7)), (Mode::new(&[-1, 1]), c(9.0, 9.0))],
        )
        .unwrap();
        assert_eq!(s.get(&Mode::new(&[-1, 1])), c(0.2, -0.7));
    }

    #[test]
    fn budget_prunes_only_negligible_tails() {
        let a = TrigSeries::real_from_pairs(
            1,
            [(Mode::scalar(0), c(1.0, 0.0)), (Mode::scalar(3), c(1e-20, 0.0))],
        )
        .unwrap()
        .with_budget(4);
        let sq = a.convolve(&a).unwrap();
        assert_eq!(sq.support_radius(), 3);

        let big = TrigSeries::real_from_pairs(
            1,
            [(Mode::scalar(0), c(1.0, 0.0)), (Mode::scalar(3), c(0.5, 0.0))],
        )
        .unwrap()
        .with_budget(4);
        assert!(matches!(big.convolve(&big), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn sine_peaks_at_quarter_period() {
        let f = TrigSeries::alpha_beta_sin(1.5, 0.25);
        let freq = FrequencyVector::periodic(1.0);
        let v = f.evaluate(&freq, std::f64::consts::FRAC_PI_2);
        assert!((v - c(1.75, 0.0)).norm() < 1e-15);
    }
}
